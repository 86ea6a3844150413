// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "cbcd/image.hpp"

namespace cbcd {

/// 8-bit image files. RGB travels as PNG or binary PPM (P6); CFA planes as
/// binary PGM (P5) with the layout recorded in a '# bayer: RGGB' header
/// comment. Values are rounded and clamped to [0, 255] on write.

RgbImage read_rgb(const std::string& path);  // dispatches on extension
void write_rgb(const std::string& path, const RgbImage& img);

RgbImage read_png(const std::string& path);
void write_png(const std::string& path, const RgbImage& img);

RgbImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const RgbImage& img);

MosaicImage read_cfa_pgm(const std::string& path);
void write_cfa_pgm(const std::string& path, const MosaicImage& m);

}  // namespace cbcd
