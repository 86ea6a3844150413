// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbcd/image.hpp"
#include "cbcd/util.hpp"

namespace cbcd {

/// H x W x C feature volume, row-major HWC: data[(y*W + x)*C + c].
struct Tensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    static Tensor from_planes(const std::vector<const PlaneImage*>& planes);
    PlaneImage plane(int c) const;
};

enum class LayerKind : std::uint8_t {
    InputConvRelu = 0,   // conv + ReLU
    HiddenConvBnRelu = 1,  // conv + batch norm + ReLU
    OutputConv = 2,      // pure conv
};

/// One 3x3 convolution block. skip_sources lists earlier layer indices whose
/// outputs are concatenated after the previous layer's output to form this
/// layer's input.
struct LayerSpec {
    LayerKind kind = LayerKind::HiddenConvBnRelu;
    int in_channels = 0;
    int out_channels = 0;
    int dilation = 1;  // 1 or 3
    std::vector<int> skip_sources;
};

enum class Subnet : std::uint8_t { Green = 0, GreenRed = 1, GreenBlue = 2 };

Subnet subnet_from_string(const std::string& s);
std::string to_string(Subnet s);

/// Input channel count of each sub-network (3 for green, 2 for the
/// difference networks).
int subnet_input_channels(Subnet s);

struct NetworkSpec {
    Subnet name = Subnet::Green;
    int input_channels = 3;
    int width = 32;  // K, hidden feature count
    std::vector<LayerSpec> layers;

    int depth() const { return static_cast<int>(layers.size()); }
    int hidden_count() const { return depth() >= 2 ? depth() - 2 : 0; }
    /// Channel count fed into layer i (previous output plus skips).
    int layer_input_channels(int i) const;
    void validate() const;  // throws DataError on malformed specs
};

constexpr double kBnEpsilon = 1e-5;

struct ConvParams {
    std::vector<double> w;  // [3][3][Cin][Cout] row-major
    std::vector<double> b;  // [Cout]
};

struct BnParams {
    std::vector<double> gamma, beta, mean, var;  // each [Cout]
    double eps = kBnEpsilon;
};

struct LayerWeights {
    ConvParams conv;
    BnParams bn;  // populated only for HiddenConvBnRelu layers
};

struct NetworkWeights {
    std::vector<LayerWeights> layers;
};

/// Zero weights everywhere (forward output is identically zero); BN stats at
/// identity (mean 0, var 1).
NetworkWeights zero_weights(const NetworkSpec& spec);

/// Fan-in-scaled random init: w ~ N(0, 2/(9*Cin)), biases zero, BN gamma 1.
NetworkWeights init_weights(const NetworkSpec& spec, Rng& rng);

/// 3x3 convolution, "same" zero padding, unit stride. w is [3][3][Cin][Cout],
/// dilation spreads the taps (3 -> effective 7x7 support).
Tensor conv2d(const Tensor& x, const std::vector<double>& w, const std::vector<double>& b,
              int in_channels, int out_channels, int dilation);

/// Per-channel y = gamma*(x - mean)/sqrt(var + eps) + beta using stored
/// statistics (inference mode).
Tensor batch_norm_infer(const Tensor& x, const BnParams& bn);

Tensor relu(const Tensor& x);

/// Full inference-mode forward pass; returns the single-channel prediction.
PlaneImage forward(const NetworkSpec& spec, const NetworkWeights& weights, const Tensor& x);

/// Conv kernel weights only: sum over layers of 3*3*Cin*Cout. Biases and BN
/// parameters are excluded from the accounting.
long long count_params(const NetworkSpec& spec);

/// One multiply-accumulate per kernel weight per pixel: params * H * W.
long long count_flops(const NetworkSpec& spec, int height, int width);

/// The shipped architectures: K=32 everywhere. Green: 30 plain hidden blocks,
/// no skips, dilation 1 (277,632 weights). Green-red: 29 hidden blocks of
/// which 5 concatenate the (i-5)-th layer output, dilation 3 (314,208).
/// Green-blue: 31 hidden blocks, 5 concats, dilation 3 (332,640).
NetworkSpec default_spec(Subnet which);

/// Builds a plain spec: input conv, `depth`-2 hidden blocks, output conv.
NetworkSpec plain_spec(Subnet which, int width, int depth, int dilation = 1);

/// Spec config file (key=value): name, width, hidden layer layout.
NetworkSpec read_spec_config(const std::string& path);
void write_spec_config(const std::string& path, const NetworkSpec& spec);
NetworkSpec spec_from_kv(const std::map<std::string, std::string>& kv);

}  // namespace cbcd
