// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>

#include "cbcd/hqli.hpp"
#include "cbcd/image.hpp"
#include "cbcd/nn.hpp"

namespace cbcd {

/// One supervised pair. Inputs per target:
///   g:  [r0, g0, b0]          label g - g0
///   gr: [g0 - r0, g0]         label (g - r) - (g0 - r0)
///   gb: [g0 - b0, g0]         label (g - b) - (g0 - b0)
struct TrainingExample {
    Tensor input;
    PlaneImage label;
};

enum class LossKind { Mse, PNorm };

struct TrainConfig {
    int batch_size = 128;
    double initial_lr = 0.005;
    int lr_halving_period = 5;            // epochs
    double lr_floor = 0.005 / 64.0;
    int epochs = 30;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double p = 0.9;                       // p-norm exponent
    double p_smooth_eps = 1e-6;           // smoothing inside (r^2 + eps^2)^(p/2)
    double bn_momentum = 0.1;
    std::uint64_t seed = 1;
    int patch_size = 50;
    double train_fraction = 0.95;         // image-level split point
    int discard_patches = 1792;           // validation patches dropped after the split
    int threads = 1;
    bool deterministic = true;            // fixed-order gradient reduction

    static TrainConfig from_kv(const std::map<std::string, std::string>& kv);
    static TrainConfig from_file(const std::string& path);
};

/// ADAM moments for every trainable array (conv weights/biases, BN scale and
/// shift), plus the step counter.
struct OptimizerState {
    NetworkWeights m, v;
    long long t = 0;

    static OptimizerState zero(const NetworkSpec& spec);
};

/// Phase-shift augmentation: the green target keeps [original, first row
/// dropped, first column dropped]; the difference targets additionally take
/// the image with both dropped.
std::vector<RgbImage> augment(const RgbImage& img, Subnet target);

struct Dataset {
    std::vector<TrainingExample> train;
    std::vector<TrainingExample> val;
};

/// Shuffles the images by cfg.seed, augments, cuts 50x50 patches in raster
/// order, splits at the 95% image boundary, discards cfg.discard_patches
/// validation patches, then turns every patch into an example by
/// mosaicking + HQLI + the target transform.
Dataset build_dataset(const std::vector<RgbImage>& images, Subnet target, BayerLayout layout,
                      const TrainConfig& cfg);

/// Builds a single example from one source patch.
TrainingExample make_example(const RgbImage& patch, Subnet target, BayerLayout layout);

/// Mean over the batch of per-example summed squared residuals.
double loss_mse(const std::vector<PlaneImage>& pred, const std::vector<PlaneImage>& label);

/// Mean over the batch of sum (r^2 + eps^2)^(p/2), the smoothed |r|^p.
double loss_pnorm(const std::vector<PlaneImage>& pred, const std::vector<PlaneImage>& label,
                  double p = 0.9, double eps = 1e-6);

struct BatchGradients {
    double loss = 0.0;
    NetworkWeights grads;  // same shapes as the weights; BN mean/var unused
};

/// Training-mode forward + reverse-mode backward over a batch. BN layers
/// normalize by batch statistics; gradients are exact for the batch loss.
/// Does not touch the stored running statistics.
BatchGradients backward(const NetworkSpec& spec, const NetworkWeights& weights,
                        const std::vector<TrainingExample>& batch, LossKind loss,
                        const TrainConfig& cfg);

/// Training-mode batch loss only (used by the finite-difference oracles).
double batch_loss(const NetworkSpec& spec, const NetworkWeights& weights,
                  const std::vector<TrainingExample>& batch, LossKind loss,
                  const TrainConfig& cfg);

/// Training-mode (batch-statistics BN) predictions for each example.
std::vector<PlaneImage> training_predictions(const NetworkSpec& spec,
                                             const NetworkWeights& weights,
                                             const std::vector<TrainingExample>& batch,
                                             const TrainConfig& cfg);

/// One ADAM update: m <- b1*m + (1-b1)*g, v <- b2*v + (1-b2)*g^2, bias
/// correction, theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(OptimizerState& state, const NetworkWeights& grads, NetworkWeights& weights,
               double lr, const TrainConfig& cfg);

/// max(initial * 2^-floor((epoch-1)/period), floor). Epochs start at 1.
double lr_schedule(int epoch, const TrainConfig& cfg);

struct EpochTrace {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    NetworkWeights weights;
    std::vector<EpochTrace> trace;
    OptimizerState opt;  // final ADAM state, for checkpoint sidecars
};

/// Divergence abort; carries the trace recorded up to the failing epoch.
struct TrainDivergence : NumericError {
    std::vector<EpochTrace> trace;
    explicit TrainDivergence(const std::string& msg, std::vector<EpochTrace> t)
        : NumericError(msg), trace(std::move(t)) {}
};

/// Pointers to every trainable array of the network in a fixed order (per
/// layer: conv weights, conv bias, BN gamma, BN beta). Shared by the
/// optimizer, the checkpoint sidecar and the gradient-check oracles.
std::vector<std::vector<double>*> trainable_arrays(const NetworkSpec& spec, NetworkWeights& w);

/// Runs cfg.epochs of shuffled batches with backward + adam_step, recording
/// train/validation loss per epoch. Deterministic given cfg.seed. Throws
/// NumericError with the trace attached to the message on divergence.
TrainResult train(const NetworkSpec& spec, const Dataset& dataset, LossKind loss,
                  const TrainConfig& cfg, NetworkWeights initial,
                  const std::function<void(const EpochTrace&)>& on_epoch = nullptr);

/// Convenience: loss kind the paper assigns to each target (MSE for green,
/// p-norm for the difference networks).
LossKind default_loss(Subnet target);

/// Writes the per-epoch trace as CSV: epoch,lr,train_loss,val_loss.
void write_trace_csv(const std::string& path, const std::vector<EpochTrace>& trace);

}  // namespace cbcd
