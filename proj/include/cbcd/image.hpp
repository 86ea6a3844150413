// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cbcd/util.hpp"

namespace cbcd {

/// Single-channel raster, row-major doubles, nominal display range [0, 255].
/// Intensities stay real-valued through the whole pipeline; quantization to
/// 8 bits happens only at image export.
struct PlaneImage {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    PlaneImage() = default;
    PlaneImage(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const PlaneImage& o) const {
        return height == o.height && width == o.width;
    }
};

struct RgbImage {
    PlaneImage r, g, b;

    RgbImage() = default;
    RgbImage(int h, int w) : r(h, w), g(h, w), b(h, w) {}
    int height() const { return r.height; }
    int width() const { return r.width; }
};

/// The four 2x2 Bayer arrangements, named by reading the tile row-major.
enum class BayerLayout { RGGB, GRBG, GBRG, BGGR };

enum class CfaChannel : std::uint8_t { R = 0, G = 1, B = 2 };

/// Channel captured at pixel (y, x) under the given layout.
CfaChannel channel_at(BayerLayout layout, int y, int x);

BayerLayout layout_from_string(const std::string& s);
std::string to_string(BayerLayout layout);

/// CFA raster: one sample per pixel, roles given by the layout.
struct MosaicImage {
    PlaneImage cfa;
    BayerLayout layout = BayerLayout::RGGB;
};

/// Coordinate sets of the originally available samples per channel.
struct PixelSets {
    std::vector<std::pair<int, int>> r, g, b;
};

/// Subsamples an RGB image through the CFA. Lossless at sampled positions.
MosaicImage mosaic(const RgbImage& src, BayerLayout layout);

/// Enumerates the sampled-position sets for a height x width grid.
PixelSets pixel_sets(int height, int width, BayerLayout layout);

/// 10*log10(peak^2 / MSE); +infinity when the planes are identical (callers
/// exclude infinite values from dataset averages).
double psnr(const PlaneImage& a, const PlaneImage& b, double peak = 255.0);

struct ChannelPsnr {
    double r = 0.0, g = 0.0, b = 0.0;
    double cpsnr = 0.0;  // over all three planes jointly
};

/// Per-channel PSNR plus composite, optionally ignoring a crop-wide border.
ChannelPsnr psnr_report(const RgbImage& truth, const RgbImage& est, int crop = 0,
                        double peak = 255.0);

/// Clamps every value to [0, 255].
PlaneImage clip(const PlaneImage& x);
RgbImage clip(const RgbImage& x);

/// Non-overlapping size x size tiles in raster order; partial tiles at the
/// right/bottom edge are dropped.
std::vector<RgbImage> extract_patches(const RgbImage& img, int size = 50);

}  // namespace cbcd
