// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <tuple>

#include "cbcd/image.hpp"

namespace cbcd {

/// High quality linear interpolation: fixed 5x5 stencils that correct the
/// bilinear estimate of one channel with the Laplacian of the channel
/// actually sampled at the target pixel. All coefficients are eighths.
struct HqliKernels {
    // Numerators; every stencil sums to 8 so constants reproduce exactly.
    std::array<std::array<double, 5>, 5> green_at_rb;   // G at an R or B site
    std::array<std::array<double, 5>, 5> chroma_row;    // R at G in an R row (B symmetric)
    std::array<std::array<double, 5>, 5> chroma_col;    // R at G in an R column
    std::array<std::array<double, 5>, 5> chroma_cross;  // R at a B site (and B at R)
    static constexpr double divisor = 8.0;

    static const HqliKernels& canonical();
};

struct HqliOptions {
    /// Clamp the interpolated planes to [0, 255]. Off by default; the
    /// networks consume signed residual inputs.
    bool clip_output = false;
};

struct InitPlanes {
    PlaneImage r0, g0, b0;
};

/// Fills the missing channel values of a mosaic by the 5x5 stencils applied
/// to the raw CFA raster with symmetric mirror padding at the borders.
/// Originally sampled values are copied verbatim. Requires at least 5x5.
InitPlanes hqli(const MosaicImage& m, const HqliOptions& opts = {});

/// (g0 - r0, g0 - b0). Elementwise, unclipped; values may be negative.
std::pair<PlaneImage, PlaneImage> difference_planes(const PlaneImage& r0, const PlaneImage& g0,
                                                    const PlaneImage& b0);

}  // namespace cbcd
