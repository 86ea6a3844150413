// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "conv_ops.hpp"

namespace cbcd {

Tensor Tensor::from_planes(const std::vector<const PlaneImage*>& planes) {
    if (planes.empty()) throw DataError("Tensor::from_planes: no planes");
    const int h = planes[0]->height, w = planes[0]->width;
    Tensor t(h, w, static_cast<int>(planes.size()));
    for (std::size_t c = 0; c < planes.size(); ++c) {
        if (!planes[c]->same_shape(*planes[0]))
            throw DataError("Tensor::from_planes: shape mismatch");
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) t.at(y, x, static_cast<int>(c)) = planes[c]->at(y, x);
    }
    return t;
}

PlaneImage Tensor::plane(int c) const {
    PlaneImage p(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) p.at(y, x) = at(y, x, c);
    return p;
}

Subnet subnet_from_string(const std::string& s) {
    if (s == "g") return Subnet::Green;
    if (s == "gr") return Subnet::GreenRed;
    if (s == "gb") return Subnet::GreenBlue;
    throw DataError("unknown sub-network name (want g, gr or gb): '" + s + "'");
}

std::string to_string(Subnet s) {
    switch (s) {
        case Subnet::Green: return "g";
        case Subnet::GreenRed: return "gr";
        case Subnet::GreenBlue: return "gb";
    }
    return "g";
}

int subnet_input_channels(Subnet s) { return s == Subnet::Green ? 3 : 2; }

int NetworkSpec::layer_input_channels(int i) const {
    if (i == 0) return input_channels;
    int c = layers[i - 1].out_channels;
    for (int s : layers[i].skip_sources) c += layers[s].out_channels;
    return c;
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw DataError("spec: no layers");
    if (depth() > 40) throw DataError("spec: depth exceeds 40");
    if (layers.front().kind != LayerKind::InputConvRelu)
        throw DataError("spec: first layer must be the input conv");
    if (layers.back().kind != LayerKind::OutputConv)
        throw DataError("spec: last layer must be the output conv");
    if (layers.back().out_channels != 1)
        throw DataError("spec: output layer must emit one channel");
    for (int i = 0; i < depth(); ++i) {
        const LayerSpec& l = layers[i];
        if (i > 0 && i + 1 < depth() && l.kind != LayerKind::HiddenConvBnRelu)
            throw DataError("spec: interior layers must be hidden conv blocks");
        if (l.kind == LayerKind::HiddenConvBnRelu && l.out_channels != width)
            throw DataError("spec: hidden layers must emit K channels");
        if (l.dilation != 1 && l.dilation != 3)
            throw DataError("spec: dilation must be 1 or 3");
        if (l.in_channels != layer_input_channels(i))
            throw DataError("spec: layer input channels inconsistent with wiring");
        for (int s : l.skip_sources) {
            if (s < 0 || s >= i) throw DataError("spec: skip source must be strictly earlier");
        }
        if (!l.skip_sources.empty() && i < 6)
            throw DataError("spec: skip concatenation only allowed from layer 6 on");
    }
}

NetworkWeights zero_weights(const NetworkSpec& spec) {
    NetworkWeights w;
    w.layers.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        const int cin = spec.layer_input_channels(static_cast<int>(i));
        w.layers[i].conv.w.assign(9u * cin * l.out_channels, 0.0);
        w.layers[i].conv.b.assign(l.out_channels, 0.0);
        if (l.kind == LayerKind::HiddenConvBnRelu) {
            BnParams& bn = w.layers[i].bn;
            bn.gamma.assign(l.out_channels, 1.0);
            bn.beta.assign(l.out_channels, 0.0);
            bn.mean.assign(l.out_channels, 0.0);
            bn.var.assign(l.out_channels, 1.0);
        }
    }
    return w;
}

NetworkWeights init_weights(const NetworkSpec& spec, Rng& rng) {
    NetworkWeights w = zero_weights(spec);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const int cin = spec.layer_input_channels(static_cast<int>(i));
        const double std = std::sqrt(2.0 / (9.0 * cin));
        for (double& v : w.layers[i].conv.w) v = std * rng.normal();
    }
    return w;
}

Tensor conv2d(const Tensor& x, const std::vector<double>& w, const std::vector<double>& b,
              int in_channels, int out_channels, int dilation) {
    if (x.channels != in_channels) throw DataError("conv2d: input channel mismatch");
    if (dilation != 1 && dilation != 3) throw DataError("conv2d: dilation must be 1 or 3");
    if (w.size() != 9u * in_channels * out_channels || b.size() != static_cast<std::size_t>(out_channels))
        throw DataError("conv2d: weight shape mismatch");
    ConvParams p{w, b};
    Tensor out;
    std::vector<double> cols;
    detail::conv_forward(x, p, in_channels, out_channels, dilation, out, cols);
    return out;
}

Tensor batch_norm_infer(const Tensor& x, const BnParams& bn) {
    const int c = x.channels;
    if (bn.gamma.size() != static_cast<std::size_t>(c) || bn.beta.size() != bn.gamma.size() ||
        bn.mean.size() != bn.gamma.size() || bn.var.size() != bn.gamma.size())
        throw DataError("batch_norm_infer: statistics shape mismatch");
    std::vector<double> scale(c), shift(c);
    for (int i = 0; i < c; ++i) {
        if (bn.var[i] < 0.0) throw DataError("batch_norm_infer: negative variance");
        scale[i] = bn.gamma[i] / std::sqrt(bn.var[i] + bn.eps);
        shift[i] = bn.beta[i] - bn.mean[i] * scale[i];
    }
    Tensor out(x.height, x.width, c);
    const std::size_t npix = x.data.size() / c;
    for (std::size_t p = 0; p < npix; ++p)
        for (int i = 0; i < c; ++i) out.data[p * c + i] = x.data[p * c + i] * scale[i] + shift[i];
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

namespace {

void check_weights(const NetworkSpec& spec, const NetworkWeights& weights) {
    if (weights.layers.size() != spec.layers.size())
        throw DataError("forward: weight/spec layer count mismatch");
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const int cin = spec.layer_input_channels(static_cast<int>(i));
        const LayerSpec& l = spec.layers[i];
        if (weights.layers[i].conv.w.size() != 9u * cin * l.out_channels)
            throw DataError("forward: conv weight shape mismatch at layer " + std::to_string(i));
        if (weights.layers[i].conv.b.size() != static_cast<std::size_t>(l.out_channels))
            throw DataError("forward: conv bias shape mismatch at layer " + std::to_string(i));
        if (l.kind == LayerKind::HiddenConvBnRelu &&
            weights.layers[i].bn.gamma.size() != static_cast<std::size_t>(l.out_channels))
            throw DataError("forward: BN shape mismatch at layer " + std::to_string(i));
    }
}

Tensor concat_input(const NetworkSpec& spec, int i, const Tensor& x,
                    const std::vector<Tensor>& outputs) {
    const Tensor& prev = i == 0 ? x : outputs[i - 1];
    const LayerSpec& l = spec.layers[i];
    if (l.skip_sources.empty()) return prev;
    Tensor in(prev.height, prev.width, spec.layer_input_channels(i));
    const std::size_t npix = static_cast<std::size_t>(prev.height) * prev.width;
    std::vector<const Tensor*> parts{&prev};
    for (int s : l.skip_sources) parts.push_back(&outputs[s]);
    for (std::size_t p = 0; p < npix; ++p) {
        double* dst = &in.data[p * in.channels];
        for (const Tensor* part : parts) {
            const double* src = &part->data[p * part->channels];
            dst = std::copy(src, src + part->channels, dst);
        }
    }
    return in;
}

}  // namespace

PlaneImage forward(const NetworkSpec& spec, const NetworkWeights& weights, const Tensor& x) {
    spec.validate();
    check_weights(spec, weights);
    if (x.channels != spec.input_channels) throw DataError("forward: input channel mismatch");

    // Last consumer of each layer's output, so buffers can be released early.
    const int n = spec.depth();
    std::vector<int> last_use(n, 0);
    for (int i = 1; i < n; ++i) {
        last_use[i - 1] = std::max(last_use[i - 1], i);
        for (int s : spec.layers[i].skip_sources) last_use[s] = std::max(last_use[s], i);
    }

    std::vector<Tensor> outputs(n);
    std::vector<double> cols;
    for (int i = 0; i < n; ++i) {
        const LayerSpec& l = spec.layers[i];
        const Tensor in = concat_input(spec, i, x, outputs);
        Tensor z;
        detail::conv_forward(in, weights.layers[i].conv, in.channels, l.out_channels, l.dilation,
                             z, cols);
        switch (l.kind) {
            case LayerKind::InputConvRelu:
                outputs[i] = relu(z);
                break;
            case LayerKind::HiddenConvBnRelu:
                outputs[i] = relu(batch_norm_infer(z, weights.layers[i].bn));
                break;
            case LayerKind::OutputConv:
                outputs[i] = std::move(z);
                break;
        }
        for (int j = 0; j < i; ++j)
            if (last_use[j] == i) {
                outputs[j].data.clear();
                outputs[j].data.shrink_to_fit();
            }
    }
    return outputs.back().plane(0);
}

long long count_params(const NetworkSpec& spec) {
    long long total = 0;
    for (int i = 0; i < spec.depth(); ++i)
        total += 9LL * spec.layer_input_channels(i) * spec.layers[i].out_channels;
    return total;
}

long long count_flops(const NetworkSpec& spec, int height, int width) {
    return count_params(spec) * static_cast<long long>(height) * width;
}

NetworkSpec plain_spec(Subnet which, int width, int depth, int dilation) {
    if (depth < 2) throw DataError("plain_spec: depth must be at least 2");
    NetworkSpec s;
    s.name = which;
    s.input_channels = subnet_input_channels(which);
    s.width = width;
    s.layers.push_back({LayerKind::InputConvRelu, s.input_channels, width, 1, {}});
    for (int i = 0; i < depth - 2; ++i)
        s.layers.push_back({LayerKind::HiddenConvBnRelu, width, width, dilation, {}});
    s.layers.push_back({LayerKind::OutputConv, width, 1, 1, {}});
    return s;
}

namespace {

// Converts hidden layers at the given absolute indices into concat blocks
// taking [out(i-1) || out(i-5)] (and out(i-10) when doubled).
void add_skips(NetworkSpec& s, const std::vector<int>& concat5, const std::vector<int>& concat10) {
    for (int i : concat5) {
        s.layers[i].skip_sources = {i - 5};
        s.layers[i].in_channels = s.layer_input_channels(i);
    }
    for (int i : concat10) {
        s.layers[i].skip_sources = {i - 5, i - 10};
        s.layers[i].in_channels = s.layer_input_channels(i);
    }
}

}  // namespace

NetworkSpec default_spec(Subnet which) {
    switch (which) {
        case Subnet::Green:
            return plain_spec(Subnet::Green, 32, 32, 1);
        case Subnet::GreenRed: {
            NetworkSpec s = plain_spec(Subnet::GreenRed, 32, 31, 3);
            add_skips(s, {6, 11, 16, 21, 26}, {});
            s.validate();
            return s;
        }
        case Subnet::GreenBlue: {
            NetworkSpec s = plain_spec(Subnet::GreenBlue, 32, 33, 3);
            add_skips(s, {6, 11, 16, 21, 26}, {});
            s.validate();
            return s;
        }
    }
    throw DataError("default_spec: bad subnet");
}

NetworkSpec spec_from_kv(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> std::string {
        const auto it = kv.find(key);
        if (it == kv.end()) throw DataError("spec config missing key: " + key);
        return it->second;
    };
    auto parse_list = [](const std::string& s) {
        std::vector<int> v;
        std::istringstream in(s);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (!tok.empty()) v.push_back(std::stoi(tok));
        }
        return v;
    };
    const Subnet which = subnet_from_string(get("name"));
    const int width = std::stoi(get("width"));
    const int depth = std::stoi(get("depth"));
    int dilation = 1;
    if (kv.count("dilation")) dilation = std::stoi(kv.at("dilation"));
    NetworkSpec s = plain_spec(which, width, depth, dilation);
    std::vector<int> c5, c10;
    if (kv.count("concat5")) c5 = parse_list(kv.at("concat5"));
    if (kv.count("concat10")) c10 = parse_list(kv.at("concat10"));
    add_skips(s, c5, c10);
    s.validate();
    return s;
}

NetworkSpec read_spec_config(const std::string& path) {
    return spec_from_kv(read_kv_file(path));
}

void write_spec_config(const std::string& path, const NetworkSpec& spec) {
    spec.validate();
    std::vector<int> c5, c10;
    int dilation = 1;
    for (int i = 1; i + 1 < spec.depth(); ++i) {
        const LayerSpec& l = spec.layers[i];
        dilation = l.dilation;
        if (l.skip_sources.empty()) continue;
        if (l.skip_sources == std::vector<int>{i - 5})
            c5.push_back(i);
        else if (l.skip_sources == std::vector<int>{i - 5, i - 10})
            c10.push_back(i);
        else
            throw DataError("spec config only records (i-5) and (i-5,i-10) skips");
    }
    std::ostringstream out;
    out << "name=" << to_string(spec.name) << "\n";
    out << "width=" << spec.width << "\n";
    out << "depth=" << spec.depth() << "\n";
    out << "dilation=" << dilation << "\n";
    auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    if (!c5.empty()) out << "concat5=" << join(c5) << "\n";
    if (!c10.empty()) out << "concat10=" << join(c10) << "\n";
    std::ofstream f(path);
    if (!f) throw DataError("cannot write spec config: " + path);
    f << out.str();
}

}  // namespace cbcd
