// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "conv_ops.hpp"

namespace cbcd {

namespace {

// Per-layer activations cached for the backward pass. `in` is stored only
// for layers with skip concatenation; other layers read the previous
// layer's output directly.
struct LayerCache {
    std::vector<Tensor> in;
    std::vector<Tensor> z;    // conv output, hidden layers only
    std::vector<Tensor> out;
    std::vector<double> mean, var;  // batch statistics, hidden layers only
};

struct ForwardCache {
    std::vector<LayerCache> layers;
};

const Tensor& layer_input(const NetworkSpec& spec, const ForwardCache& cache,
                          const std::vector<TrainingExample>& batch, int i, std::size_t ex) {
    if (!spec.layers[i].skip_sources.empty()) return cache.layers[i].in[ex];
    return i == 0 ? batch[ex].input : cache.layers[i - 1].out[ex];
}

// Training-mode forward over the batch: BN uses per-channel statistics
// pooled over every example. Returns the final-layer predictions via
// cache.layers.back().out.
void forward_train(const NetworkSpec& spec, const NetworkWeights& weights,
                   const std::vector<TrainingExample>& batch, const TrainConfig& cfg,
                   ForwardCache& cache) {
    const int n = spec.depth();
    const std::size_t nb = batch.size();
    cache.layers.assign(n, {});

    for (int i = 0; i < n; ++i) {
        const LayerSpec& l = spec.layers[i];
        LayerCache& lc = cache.layers[i];
        const bool has_skips = !l.skip_sources.empty();
        if (has_skips) lc.in.resize(nb);
        lc.out.resize(nb);
        const bool hidden = l.kind == LayerKind::HiddenConvBnRelu;
        if (hidden) lc.z.resize(nb);

        parallel_for(nb, cfg.threads, [&](std::size_t ex) {
            std::vector<double> cols;
            if (has_skips) {
                const Tensor& prev = i == 0 ? batch[ex].input : cache.layers[i - 1].out[ex];
                Tensor in(prev.height, prev.width, spec.layer_input_channels(i));
                std::vector<const Tensor*> parts{&prev};
                for (int s : l.skip_sources) parts.push_back(&cache.layers[s].out[ex]);
                const std::size_t npix = static_cast<std::size_t>(prev.height) * prev.width;
                for (std::size_t p = 0; p < npix; ++p) {
                    double* dst = &in.data[p * in.channels];
                    for (const Tensor* part : parts) {
                        const double* src = &part->data[p * part->channels];
                        dst = std::copy(src, src + part->channels, dst);
                    }
                }
                lc.in[ex] = std::move(in);
            }
            const Tensor& in = layer_input(spec, cache, batch, i, ex);
            Tensor z;
            detail::conv_forward(in, weights.layers[i].conv, in.channels, l.out_channels,
                                 l.dilation, z, cols);
            if (hidden)
                lc.z[ex] = std::move(z);
            else
                lc.out[ex] = std::move(z);
        });

        if (hidden) {
            const int c = l.out_channels;
            lc.mean.assign(c, 0.0);
            lc.var.assign(c, 0.0);
            double m = 0.0;
            for (std::size_t ex = 0; ex < nb; ++ex) {  // fixed order
                const Tensor& z = lc.z[ex];
                const std::size_t npix = z.data.size() / c;
                m += static_cast<double>(npix);
                for (std::size_t p = 0; p < npix; ++p)
                    for (int ch = 0; ch < c; ++ch) lc.mean[ch] += z.data[p * c + ch];
            }
            for (int ch = 0; ch < c; ++ch) lc.mean[ch] /= m;
            for (std::size_t ex = 0; ex < nb; ++ex) {
                const Tensor& z = lc.z[ex];
                const std::size_t npix = z.data.size() / c;
                for (std::size_t p = 0; p < npix; ++p)
                    for (int ch = 0; ch < c; ++ch) {
                        const double d = z.data[p * c + ch] - lc.mean[ch];
                        lc.var[ch] += d * d;
                    }
            }
            for (int ch = 0; ch < c; ++ch) lc.var[ch] /= m;  // biased, as normalized

            const BnParams& bn = weights.layers[i].bn;
            std::vector<double> scale(c), shift(c);
            for (int ch = 0; ch < c; ++ch) {
                scale[ch] = bn.gamma[ch] / std::sqrt(lc.var[ch] + bn.eps);
                shift[ch] = bn.beta[ch] - lc.mean[ch] * scale[ch];
            }
            parallel_for(nb, cfg.threads, [&](std::size_t ex) {
                const Tensor& z = lc.z[ex];
                Tensor out(z.height, z.width, c);
                const std::size_t npix = z.data.size() / c;
                for (std::size_t p = 0; p < npix; ++p)
                    for (int ch = 0; ch < c; ++ch) {
                        const double y = z.data[p * c + ch] * scale[ch] + shift[ch];
                        out.data[p * c + ch] = y > 0.0 ? y : 0.0;
                    }
                lc.out[ex] = std::move(out);
            });
        } else if (l.kind == LayerKind::InputConvRelu) {
            parallel_for(nb, cfg.threads, [&](std::size_t ex) {
                for (double& v : lc.out[ex].data) v = v > 0.0 ? v : 0.0;
            });
        }
    }
}

double loss_value(const std::vector<PlaneImage>& pred, const std::vector<TrainingExample>& batch,
                  LossKind kind, const TrainConfig& cfg) {
    const double n = static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t ex = 0; ex < batch.size(); ++ex) {
        const PlaneImage& lbl = batch[ex].label;
        double s = 0.0;
        if (kind == LossKind::Mse) {
            for (std::size_t i = 0; i < lbl.size(); ++i) {
                const double r = pred[ex].data[i] - lbl.data[i];
                s += r * r;
            }
        } else {
            const double e2 = cfg.p_smooth_eps * cfg.p_smooth_eps;
            for (std::size_t i = 0; i < lbl.size(); ++i) {
                const double r = pred[ex].data[i] - lbl.data[i];
                s += std::pow(r * r + e2, cfg.p / 2.0);
            }
        }
        total += s;
    }
    return total / n;
}

// dL/dpred for one example.
void loss_grad(const PlaneImage& pred, const PlaneImage& lbl, LossKind kind,
               const TrainConfig& cfg, double n, Tensor& dpred) {
    dpred = Tensor(pred.height, pred.width, 1);
    if (kind == LossKind::Mse) {
        for (std::size_t i = 0; i < lbl.size(); ++i)
            dpred.data[i] = 2.0 / n * (pred.data[i] - lbl.data[i]);
    } else {
        const double e2 = cfg.p_smooth_eps * cfg.p_smooth_eps;
        for (std::size_t i = 0; i < lbl.size(); ++i) {
            const double r = pred.data[i] - lbl.data[i];
            dpred.data[i] = cfg.p / n * r * std::pow(r * r + e2, cfg.p / 2.0 - 1.0);
        }
    }
}

}  // namespace

std::vector<std::vector<double>*> trainable_arrays(const NetworkSpec& spec, NetworkWeights& w) {
    std::vector<std::vector<double>*> arrays;
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        arrays.push_back(&w.layers[i].conv.w);
        arrays.push_back(&w.layers[i].conv.b);
        if (spec.layers[i].kind == LayerKind::HiddenConvBnRelu) {
            arrays.push_back(&w.layers[i].bn.gamma);
            arrays.push_back(&w.layers[i].bn.beta);
        }
    }
    return arrays;
}

OptimizerState OptimizerState::zero(const NetworkSpec& spec) {
    OptimizerState s;
    s.m = zero_weights(spec);
    s.v = zero_weights(spec);
    for (auto& layer : s.m.layers) {
        std::fill(layer.bn.gamma.begin(), layer.bn.gamma.end(), 0.0);
        std::fill(layer.bn.var.begin(), layer.bn.var.end(), 0.0);
    }
    for (auto& layer : s.v.layers) {
        std::fill(layer.bn.gamma.begin(), layer.bn.gamma.end(), 0.0);
        std::fill(layer.bn.var.begin(), layer.bn.var.end(), 0.0);
    }
    s.t = 0;
    return s;
}

std::vector<RgbImage> augment(const RgbImage& img, Subnet target) {
    if (img.height() < 2 || img.width() < 2) throw DataError("augment: image too small");
    auto crop = [&](int y0, int x0) {
        RgbImage out(img.height() - y0, img.width() - x0);
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x) {
                out.r.at(y, x) = img.r.at(y + y0, x + x0);
                out.g.at(y, x) = img.g.at(y + y0, x + x0);
                out.b.at(y, x) = img.b.at(y + y0, x + x0);
            }
        return out;
    };
    std::vector<RgbImage> out;
    out.push_back(img);
    out.push_back(crop(1, 0));
    out.push_back(crop(0, 1));
    if (target != Subnet::Green) out.push_back(crop(1, 1));
    return out;
}

TrainingExample make_example(const RgbImage& patch, Subnet target, BayerLayout layout) {
    const MosaicImage m = mosaic(patch, layout);
    const InitPlanes init = hqli(m);
    TrainingExample ex;
    ex.label = PlaneImage(patch.height(), patch.width());
    switch (target) {
        case Subnet::Green: {
            ex.input = Tensor::from_planes({&init.r0, &init.g0, &init.b0});
            for (std::size_t i = 0; i < ex.label.size(); ++i)
                ex.label.data[i] = patch.g.data[i] - init.g0.data[i];
            break;
        }
        case Subnet::GreenRed: {
            auto [gr0, gb0] = difference_planes(init.r0, init.g0, init.b0);
            ex.input = Tensor::from_planes({&gr0, &init.g0});
            for (std::size_t i = 0; i < ex.label.size(); ++i)
                ex.label.data[i] = (patch.g.data[i] - patch.r.data[i]) - gr0.data[i];
            break;
        }
        case Subnet::GreenBlue: {
            auto [gr0, gb0] = difference_planes(init.r0, init.g0, init.b0);
            ex.input = Tensor::from_planes({&gb0, &init.g0});
            for (std::size_t i = 0; i < ex.label.size(); ++i)
                ex.label.data[i] = (patch.g.data[i] - patch.b.data[i]) - gb0.data[i];
            break;
        }
    }
    return ex;
}

Dataset build_dataset(const std::vector<RgbImage>& images, Subnet target, BayerLayout layout,
                      const TrainConfig& cfg) {
    if (images.empty()) throw DataError("build_dataset: no images");
    Rng rng(cfg.seed);
    const std::vector<std::size_t> order = rng.permutation(images.size());
    const std::size_t n_train =
        static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(images.size()));

    std::vector<RgbImage> train_patches, val_patches;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto& sink = k < n_train ? train_patches : val_patches;
        for (const RgbImage& variant : augment(images[order[k]], target))
            for (RgbImage& p : extract_patches(variant, cfg.patch_size))
                sink.push_back(std::move(p));
    }
    if (val_patches.size() <= static_cast<std::size_t>(cfg.discard_patches))
        throw DataError(
            "build_dataset: validation is empty after discarding " +
            std::to_string(cfg.discard_patches) +
            " patches; reduce the 'discard' config key for desk-scale datasets");
    val_patches.erase(val_patches.begin(), val_patches.begin() + cfg.discard_patches);

    Dataset ds;
    ds.train.resize(train_patches.size());
    ds.val.resize(val_patches.size());
    parallel_for(train_patches.size(), cfg.threads,
                 [&](std::size_t i) { ds.train[i] = make_example(train_patches[i], target, layout); });
    parallel_for(val_patches.size(), cfg.threads,
                 [&](std::size_t i) { ds.val[i] = make_example(val_patches[i], target, layout); });
    return ds;
}

double loss_mse(const std::vector<PlaneImage>& pred, const std::vector<PlaneImage>& label) {
    if (pred.size() != label.size() || pred.empty()) throw DataError("loss_mse: batch mismatch");
    double total = 0.0;
    for (std::size_t ex = 0; ex < pred.size(); ++ex) {
        double s = 0.0;
        for (std::size_t i = 0; i < label[ex].size(); ++i) {
            const double r = pred[ex].data[i] - label[ex].data[i];
            s += r * r;
        }
        total += s;
    }
    return total / static_cast<double>(pred.size());
}

double loss_pnorm(const std::vector<PlaneImage>& pred, const std::vector<PlaneImage>& label,
                  double p, double eps) {
    if (pred.size() != label.size() || pred.empty()) throw DataError("loss_pnorm: batch mismatch");
    if (p <= 0.0 || p > 1.0) throw DataError("loss_pnorm: p must be in (0, 1]");
    const double e2 = eps * eps;
    double total = 0.0;
    for (std::size_t ex = 0; ex < pred.size(); ++ex) {
        double s = 0.0;
        for (std::size_t i = 0; i < label[ex].size(); ++i) {
            const double r = pred[ex].data[i] - label[ex].data[i];
            s += std::pow(r * r + e2, p / 2.0);
        }
        total += s;
    }
    return total / static_cast<double>(pred.size());
}

double batch_loss(const NetworkSpec& spec, const NetworkWeights& weights,
                  const std::vector<TrainingExample>& batch, LossKind loss,
                  const TrainConfig& cfg) {
    ForwardCache cache;
    forward_train(spec, weights, batch, cfg, cache);
    std::vector<PlaneImage> preds(batch.size());
    for (std::size_t ex = 0; ex < batch.size(); ++ex)
        preds[ex] = cache.layers.back().out[ex].plane(0);
    return loss_value(preds, batch, loss, cfg);
}

std::vector<PlaneImage> training_predictions(const NetworkSpec& spec,
                                             const NetworkWeights& weights,
                                             const std::vector<TrainingExample>& batch,
                                             const TrainConfig& cfg) {
    ForwardCache cache;
    forward_train(spec, weights, batch, cfg, cache);
    std::vector<PlaneImage> preds(batch.size());
    for (std::size_t ex = 0; ex < batch.size(); ++ex)
        preds[ex] = cache.layers.back().out[ex].plane(0);
    return preds;
}

namespace {

struct BackwardOutput {
    BatchGradients result;
    std::vector<std::vector<double>> bn_mean, bn_var;  // per layer (hidden only)
};

BackwardOutput backward_impl(const NetworkSpec& spec, const NetworkWeights& weights,
                             const std::vector<TrainingExample>& batch, LossKind loss,
                             const TrainConfig& cfg) {
    spec.validate();
    if (batch.empty()) throw DataError("backward: empty batch");
    const std::size_t nb = batch.size();
    const int n = spec.depth();

    ForwardCache cache;
    forward_train(spec, weights, batch, cfg, cache);

    std::vector<PlaneImage> preds(nb);
    for (std::size_t ex = 0; ex < nb; ++ex) preds[ex] = cache.layers.back().out[ex].plane(0);

    BackwardOutput out;
    out.result.loss = loss_value(preds, batch, loss, cfg);
    if (!std::isfinite(out.result.loss)) throw NumericError("backward: non-finite loss");
    out.result.grads = zero_weights(spec);
    for (auto& layer : out.result.grads.layers) {
        std::fill(layer.bn.gamma.begin(), layer.bn.gamma.end(), 0.0);
        std::fill(layer.bn.var.begin(), layer.bn.var.end(), 0.0);
    }
    out.bn_mean.resize(n);
    out.bn_var.resize(n);
    for (int i = 0; i < n; ++i) {
        out.bn_mean[i] = cache.layers[i].mean;
        out.bn_var[i] = cache.layers[i].var;
    }

    // Output-side gradient of every layer, accumulated over consumers.
    std::vector<std::vector<Tensor>> gout(n, std::vector<Tensor>(nb));
    parallel_for(nb, cfg.threads, [&](std::size_t ex) {
        Tensor d;
        loss_grad(preds[ex], batch[ex].label, loss, cfg, static_cast<double>(nb), d);
        gout[n - 1][ex] = std::move(d);
    });

    auto ensure = [&](int layer, std::size_t ex, int h, int w, int c) -> Tensor& {
        Tensor& t = gout[layer][ex];
        if (t.data.empty()) t = Tensor(h, w, c);
        return t;
    };

    std::vector<Tensor> dz(nb);
    std::vector<ConvParams> pgrads(nb);
    for (int i = n - 1; i >= 0; --i) {
        const LayerSpec& l = spec.layers[i];
        const LayerCache& lc = cache.layers[i];
        const int c = l.out_channels;

        // dz: gradient at the conv output
        if (l.kind == LayerKind::OutputConv) {
            for (std::size_t ex = 0; ex < nb; ++ex) dz[ex] = std::move(gout[i][ex]);
        } else if (l.kind == LayerKind::InputConvRelu) {
            parallel_for(nb, cfg.threads, [&](std::size_t ex) {
                Tensor d = std::move(gout[i][ex]);
                const Tensor& o = lc.out[ex];
                for (std::size_t k = 0; k < d.data.size(); ++k)
                    if (o.data[k] <= 0.0) d.data[k] = 0.0;
                dz[ex] = std::move(d);
            });
        } else {
            // ReLU mask, then batch-statistics BN backward.
            const BnParams& bn = weights.layers[i].bn;
            std::vector<double> inv_std(c);
            for (int ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(lc.var[ch] + bn.eps);

            // dy = gout .* relu'(out); reductions below run in example order.
            parallel_for(nb, cfg.threads, [&](std::size_t ex) {
                Tensor& d = gout[i][ex];
                const Tensor& o = lc.out[ex];
                for (std::size_t k = 0; k < d.data.size(); ++k)
                    if (o.data[k] <= 0.0) d.data[k] = 0.0;
            });

            std::vector<double> dgamma(c, 0.0), dbeta(c, 0.0);
            std::vector<double> sum_dxhat(c, 0.0), sum_dxhat_xhat(c, 0.0);
            double m = 0.0;
            for (std::size_t ex = 0; ex < nb; ++ex) {
                const Tensor& dy = gout[i][ex];
                const Tensor& z = lc.z[ex];
                const std::size_t npix = z.data.size() / c;
                m += static_cast<double>(npix);
                for (std::size_t p = 0; p < npix; ++p)
                    for (int ch = 0; ch < c; ++ch) {
                        const double xhat = (z.data[p * c + ch] - lc.mean[ch]) * inv_std[ch];
                        const double g = dy.data[p * c + ch];
                        dgamma[ch] += g * xhat;
                        dbeta[ch] += g;
                        const double dxhat = g * bn.gamma[ch];
                        sum_dxhat[ch] += dxhat;
                        sum_dxhat_xhat[ch] += dxhat * xhat;
                    }
            }
            out.result.grads.layers[i].bn.gamma = dgamma;
            out.result.grads.layers[i].bn.beta = dbeta;

            parallel_for(nb, cfg.threads, [&](std::size_t ex) {
                const Tensor& dy = gout[i][ex];
                const Tensor& z = lc.z[ex];
                Tensor d(z.height, z.width, c);
                const std::size_t npix = z.data.size() / c;
                for (std::size_t p = 0; p < npix; ++p)
                    for (int ch = 0; ch < c; ++ch) {
                        const double xhat = (z.data[p * c + ch] - lc.mean[ch]) * inv_std[ch];
                        const double dxhat = dy.data[p * c + ch] * bn.gamma[ch];
                        d.data[p * c + ch] =
                            inv_std[ch] *
                            (dxhat - sum_dxhat[ch] / m - xhat * sum_dxhat_xhat[ch] / m);
                    }
                dz[ex] = std::move(d);
            });
        }

        // Weight/bias gradients and input gradient.
        const int cin = spec.layer_input_channels(i);
        parallel_for(nb, cfg.threads, [&](std::size_t ex) {
            std::vector<double> cols;
            const Tensor& in = layer_input(spec, cache, batch, i, ex);
            detail::im2col(in, l.dilation, cols);
            detail::conv_backward_params(cols, dz[ex], cin, c, pgrads[ex]);
        });
        ConvParams& g = out.result.grads.layers[i].conv;
        for (std::size_t ex = 0; ex < nb; ++ex) {  // fixed-order reduction
            for (std::size_t k = 0; k < g.w.size(); ++k) g.w[k] += pgrads[ex].w[k];
            for (std::size_t k = 0; k < g.b.size(); ++k) g.b[k] += pgrads[ex].b[k];
        }

        if (i == 0) break;
        parallel_for(nb, cfg.threads, [&](std::size_t ex) {
            std::vector<double> dcols;
            Tensor din;
            detail::conv_backward_data(dz[ex], weights.layers[i].conv, cin, c, l.dilation, din,
                                       dcols);
            // Split across [prev || skips] and accumulate into the producers.
            const std::size_t npix = static_cast<std::size_t>(din.height) * din.width;
            int offset = 0;
            std::vector<std::pair<int, int>> targets;  // (layer, channels)
            targets.emplace_back(i - 1, spec.layers[i - 1].out_channels);
            for (int s : l.skip_sources) targets.emplace_back(s, spec.layers[s].out_channels);
            for (auto [tl, tc] : targets) {
                Tensor& acc = ensure(tl, ex, din.height, din.width, tc);
                for (std::size_t p = 0; p < npix; ++p) {
                    const double* src = &din.data[p * din.channels + offset];
                    double* dst = &acc.data[p * tc];
                    for (int ch = 0; ch < tc; ++ch) dst[ch] += src[ch];
                }
                offset += tc;
            }
        });
    }
    return out;
}

}  // namespace

BatchGradients backward(const NetworkSpec& spec, const NetworkWeights& weights,
                        const std::vector<TrainingExample>& batch, LossKind loss,
                        const TrainConfig& cfg) {
    return backward_impl(spec, weights, batch, loss, cfg).result;
}

void adam_step(OptimizerState& state, const NetworkWeights& grads, NetworkWeights& weights,
               double lr, const TrainConfig& cfg) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < weights.layers.size(); ++i) {
        auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                          std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t k = 0; k < w.size(); ++k) {
                m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * g[k];
                v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * g[k] * g[k];
                const double mhat = m[k] / bc1;
                const double vhat = v[k] / bc2;
                w[k] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
            }
        };
        update(weights.layers[i].conv.w, grads.layers[i].conv.w, state.m.layers[i].conv.w,
               state.v.layers[i].conv.w);
        update(weights.layers[i].conv.b, grads.layers[i].conv.b, state.m.layers[i].conv.b,
               state.v.layers[i].conv.b);
        if (!weights.layers[i].bn.gamma.empty()) {
            update(weights.layers[i].bn.gamma, grads.layers[i].bn.gamma,
                   state.m.layers[i].bn.gamma, state.v.layers[i].bn.gamma);
            update(weights.layers[i].bn.beta, grads.layers[i].bn.beta, state.m.layers[i].bn.beta,
                   state.v.layers[i].bn.beta);
        }
    }
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
    if (epoch < 1) throw DataError("lr_schedule: epochs start at 1");
    const int halvings = (epoch - 1) / cfg.lr_halving_period;
    return std::max(cfg.initial_lr * std::pow(2.0, -halvings), cfg.lr_floor);
}

LossKind default_loss(Subnet target) {
    return target == Subnet::Green ? LossKind::Mse : LossKind::PNorm;
}

namespace {

double validation_loss(const NetworkSpec& spec, const NetworkWeights& weights,
                       const std::vector<TrainingExample>& val, LossKind loss,
                       const TrainConfig& cfg) {
    if (val.empty()) return 0.0;
    std::vector<PlaneImage> preds(val.size());
    parallel_for(val.size(), cfg.threads,
                 [&](std::size_t i) { preds[i] = forward(spec, weights, val[i].input); });
    std::vector<PlaneImage> labels(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) labels[i] = val[i].label;
    return loss == LossKind::Mse ? loss_mse(preds, labels)
                                 : loss_pnorm(preds, labels, cfg.p, cfg.p_smooth_eps);
}

}  // namespace

TrainResult train(const NetworkSpec& spec, const Dataset& dataset, LossKind loss,
                  const TrainConfig& cfg, NetworkWeights initial,
                  const std::function<void(const EpochTrace&)>& on_epoch) {
    if (dataset.train.empty()) throw DataError("train: empty training set");
    spec.validate();

    TrainResult result;
    result.weights = std::move(initial);
    OptimizerState state = OptimizerState::zero(spec);
    Rng rng(cfg.seed);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        const std::vector<std::size_t> perm = rng.permutation(dataset.train.size());

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(perm.size(), start + cfg.batch_size);
            std::vector<TrainingExample> batch;
            batch.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) batch.push_back(dataset.train[perm[k]]);

            BackwardOutput bo;
            try {
                bo = backward_impl(spec, result.weights, batch, loss, cfg);
            } catch (const NumericError& e) {
                throw TrainDivergence(
                    "train: loss diverged at epoch " + std::to_string(epoch) + " (" + e.what() + ")",
                    result.trace);
            }
            epoch_loss += bo.result.loss * static_cast<double>(batch.size());
            seen += batch.size();

            adam_step(state, bo.result.grads, result.weights, lr, cfg);
            // running statistics follow the batch statistics with momentum
            for (std::size_t i = 0; i < result.weights.layers.size(); ++i) {
                BnParams& bn = result.weights.layers[i].bn;
                if (bn.gamma.empty()) continue;
                for (std::size_t c = 0; c < bn.mean.size(); ++c) {
                    bn.mean[c] = (1.0 - cfg.bn_momentum) * bn.mean[c] +
                                 cfg.bn_momentum * bo.bn_mean[i][c];
                    bn.var[c] = (1.0 - cfg.bn_momentum) * bn.var[c] +
                                cfg.bn_momentum * bo.bn_var[i][c];
                }
            }
        }

        EpochTrace t;
        t.epoch = epoch;
        t.lr = lr;
        t.train_loss = epoch_loss / static_cast<double>(seen);
        t.val_loss = validation_loss(spec, result.weights, dataset.val, loss, cfg);
        result.trace.push_back(t);
        if (on_epoch) on_epoch(t);
    }
    result.opt = std::move(state);
    return result;
}

TrainConfig TrainConfig::from_kv(const std::map<std::string, std::string>& kv) {
    TrainConfig c;
    auto geti = [&](const char* k, int& dst) {
        if (kv.count(k)) dst = std::stoi(kv.at(k));
    };
    auto getd = [&](const char* k, double& dst) {
        if (kv.count(k)) dst = std::stod(kv.at(k));
    };
    geti("batch_size", c.batch_size);
    getd("lr", c.initial_lr);
    geti("lr_halving_period", c.lr_halving_period);
    getd("lr_floor", c.lr_floor);
    geti("epochs", c.epochs);
    getd("beta1", c.adam_beta1);
    getd("beta2", c.adam_beta2);
    getd("adam_eps", c.adam_eps);
    getd("p", c.p);
    getd("p_smooth_eps", c.p_smooth_eps);
    getd("bn_momentum", c.bn_momentum);
    if (kv.count("seed")) c.seed = std::stoull(kv.at("seed"));
    geti("patch_size", c.patch_size);
    getd("train_fraction", c.train_fraction);
    geti("discard", c.discard_patches);
    geti("threads", c.threads);
    if (kv.count("deterministic")) c.deterministic = kv.at("deterministic") != "0";
    if (c.lr_floor > c.initial_lr) throw DataError("config: lr_floor exceeds initial lr");
    if (c.p <= 0.0 || c.p > 1.0) throw DataError("config: p must be in (0, 1]");
    return c;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
    return from_kv(read_kv_file(path));
}

void write_trace_csv(const std::string& path, const std::vector<EpochTrace>& trace) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write trace: " + path);
    out << "epoch,lr,train_loss,val_loss\n";
    out.precision(17);
    for (const EpochTrace& t : trace)
        out << t.epoch << "," << t.lr << "," << t.train_loss << "," << t.val_loss << "\n";
}

}  // namespace cbcd
