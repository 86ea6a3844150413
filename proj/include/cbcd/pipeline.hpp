// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cbcd/hqli.hpp"
#include "cbcd/model.hpp"

namespace cbcd {

/// Every intermediate plane of the reconstruction, retained for debugging
/// and for the step-by-step pipeline oracle.
struct DemosaicIntermediates {
    InitPlanes init;
    PlaneImage gr0, gb0;             // difference initializations
    PlaneImage res_g, res_gr, res_gb;  // raw network residuals
    PlaneImage g_hat, gr_hat, gb_hat;  // after residual addition
};

struct DemosaicOptions {
    int threads = 1;                    // the three sub-networks may run concurrently
    DemosaicIntermediates* debug = nullptr;
};

/// Full reconstruction: HQLI initialization, three residual predictions,
/// difference-plane assembly, sampled-value override, then clipping.
RgbImage demosaic(const MosaicImage& m, const DemosaicModel& model,
                  const DemosaicOptions& opts = {});

struct BatchTiming {
    double total_seconds = 0.0;
    double net_g_seconds = 0.0;
    double net_gr_seconds = 0.0;
    double net_gb_seconds = 0.0;
};

struct BatchResult {
    std::vector<RgbImage> images;      // empty slot when the image failed
    std::vector<std::string> errors;   // per-image message, empty on success
    BatchTiming timing;
};

/// Elementwise demosaic over many images. Per-image failures are collected
/// and the batch continues; outputs do not depend on the parallelism degree.
BatchResult demosaic_batch(const std::vector<MosaicImage>& images, const DemosaicModel& model,
                           int parallelism);

}  // namespace cbcd
