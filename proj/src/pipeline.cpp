// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/pipeline.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <functional>

namespace cbcd {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RgbImage demosaic(const MosaicImage& m, const DemosaicModel& model, const DemosaicOptions& opts) {
    if (m.cfa.height < 5 || m.cfa.width < 5)
        throw DataError("demosaic: image must be at least 5x5");
    if (model.spec_g.input_channels != 3 || model.spec_gr.input_channels != 2 ||
        model.spec_gb.input_channels != 2)
        throw DataError("demosaic: model input channel counts must be 3/2/2");

    const InitPlanes init = hqli(m);
    auto [gr0, gb0] = difference_planes(init.r0, init.g0, init.b0);

    const Tensor x_g = Tensor::from_planes({&init.r0, &init.g0, &init.b0});
    const Tensor x_gr = Tensor::from_planes({&gr0, &init.g0});
    const Tensor x_gb = Tensor::from_planes({&gb0, &init.g0});

    PlaneImage res_g, res_gr, res_gb;
    const std::array<std::function<void()>, 3> jobs{
        [&] { res_g = forward(model.spec_g, model.w_g, x_g); },
        [&] { res_gr = forward(model.spec_gr, model.w_gr, x_gr); },
        [&] { res_gb = forward(model.spec_gb, model.w_gb, x_gb); },
    };
    parallel_for(3, opts.threads, [&](std::size_t i) { jobs[i](); });

    const int h = m.cfa.height, w = m.cfa.width;
    PlaneImage g_hat(h, w), gr_hat(h, w), gb_hat(h, w);
    for (std::size_t i = 0; i < g_hat.size(); ++i) {
        g_hat.data[i] = res_g.data[i] + init.g0.data[i];
        gr_hat.data[i] = res_gr.data[i] + gr0.data[i];
        gb_hat.data[i] = res_gb.data[i] + gb0.data[i];
    }

    // Sampled green values override the estimate before the difference
    // planes are resolved into r/b.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (channel_at(m.layout, y, x) == CfaChannel::G) g_hat.at(y, x) = m.cfa.at(y, x);

    RgbImage out(h, w);
    for (std::size_t i = 0; i < g_hat.size(); ++i) {
        out.g.data[i] = g_hat.data[i];
        out.r.data[i] = g_hat.data[i] - gr_hat.data[i];
        out.b.data[i] = g_hat.data[i] - gb_hat.data[i];
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const CfaChannel c = channel_at(m.layout, y, x);
            if (c == CfaChannel::R) out.r.at(y, x) = m.cfa.at(y, x);
            if (c == CfaChannel::B) out.b.at(y, x) = m.cfa.at(y, x);
        }
    if (opts.debug) {
        opts.debug->init = init;
        opts.debug->gr0 = gr0;
        opts.debug->gb0 = gb0;
        opts.debug->res_g = res_g;
        opts.debug->res_gr = res_gr;
        opts.debug->res_gb = res_gb;
        opts.debug->g_hat = g_hat;
        opts.debug->gr_hat = gr_hat;
        opts.debug->gb_hat = gb_hat;
    }
    return clip(out);
}

BatchResult demosaic_batch(const std::vector<MosaicImage>& images, const DemosaicModel& model,
                           int parallelism) {
    BatchResult result;
    result.images.resize(images.size());
    result.errors.resize(images.size());
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<double> net_time(3, 0.0);
    parallel_for(images.size(), parallelism, [&](std::size_t i) {
        try {
            DemosaicOptions opts;
            opts.threads = 1;  // parallelism is spent across images here
            result.images[i] = demosaic(images[i], model, opts);
        } catch (const std::exception& e) {
            result.errors[i] = e.what();
        }
    });
    result.timing.total_seconds = seconds_since(t0);

    // Per-network timing probe on the first decodable image.
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!result.errors[i].empty()) continue;
        if (images[i].cfa.height < 5 || images[i].cfa.width < 5) continue;
        const InitPlanes init = hqli(images[i]);
        auto [gr0, gb0] = difference_planes(init.r0, init.g0, init.b0);
        const Tensor x_g = Tensor::from_planes({&init.r0, &init.g0, &init.b0});
        const Tensor x_gr = Tensor::from_planes({&gr0, &init.g0});
        const Tensor x_gb = Tensor::from_planes({&gb0, &init.g0});
        auto time_net = [&](const NetworkSpec& spec, const NetworkWeights& w, const Tensor& x) {
            const auto t = std::chrono::steady_clock::now();
            (void)forward(spec, w, x);
            return seconds_since(t);
        };
        net_time[0] = time_net(model.spec_g, model.w_g, x_g);
        net_time[1] = time_net(model.spec_gr, model.w_gr, x_gr);
        net_time[2] = time_net(model.spec_gb, model.w_gb, x_gb);
        break;
    }
    result.timing.net_g_seconds = net_time[0];
    result.timing.net_gr_seconds = net_time[1];
    result.timing.net_gb_seconds = net_time[2];
    return result;
}

}  // namespace cbcd
