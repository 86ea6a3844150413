// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace cbcd {

namespace {

// 2x2 tile of each layout, row-major.
constexpr CfaChannel kTiles[4][2][2] = {
    // RGGB
    {{CfaChannel::R, CfaChannel::G}, {CfaChannel::G, CfaChannel::B}},
    // GRBG
    {{CfaChannel::G, CfaChannel::R}, {CfaChannel::B, CfaChannel::G}},
    // GBRG
    {{CfaChannel::G, CfaChannel::B}, {CfaChannel::R, CfaChannel::G}},
    // BGGR
    {{CfaChannel::B, CfaChannel::G}, {CfaChannel::G, CfaChannel::R}},
};

double mse_accumulate(const PlaneImage& a, const PlaneImage& b, int crop, double& count) {
    double sum = 0.0;
    for (int y = crop; y < a.height - crop; ++y) {
        for (int x = crop; x < a.width - crop; ++x) {
            const double d = a.at(y, x) - b.at(y, x);
            sum += d * d;
        }
    }
    count += static_cast<double>(a.height - 2 * crop) * (a.width - 2 * crop);
    return sum;
}

double psnr_from(double sq_sum, double count, double peak) {
    if (sq_sum == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sq_sum / count;
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace

CfaChannel channel_at(BayerLayout layout, int y, int x) {
    return kTiles[static_cast<int>(layout)][y & 1][x & 1];
}

BayerLayout layout_from_string(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (u == "RGGB") return BayerLayout::RGGB;
    if (u == "GRBG") return BayerLayout::GRBG;
    if (u == "GBRG") return BayerLayout::GBRG;
    if (u == "BGGR") return BayerLayout::BGGR;
    throw DataError("unknown Bayer layout: '" + s + "'");
}

std::string to_string(BayerLayout layout) {
    switch (layout) {
        case BayerLayout::RGGB: return "RGGB";
        case BayerLayout::GRBG: return "GRBG";
        case BayerLayout::GBRG: return "GBRG";
        case BayerLayout::BGGR: return "BGGR";
    }
    return "RGGB";
}

MosaicImage mosaic(const RgbImage& src, BayerLayout layout) {
    if (src.r.size() == 0) throw DataError("mosaic: empty image");
    if (!src.r.same_shape(src.g) || !src.r.same_shape(src.b))
        throw DataError("mosaic: RGB planes differ in shape");
    MosaicImage m;
    m.layout = layout;
    m.cfa = PlaneImage(src.height(), src.width());
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            switch (channel_at(layout, y, x)) {
                case CfaChannel::R: m.cfa.at(y, x) = src.r.at(y, x); break;
                case CfaChannel::G: m.cfa.at(y, x) = src.g.at(y, x); break;
                case CfaChannel::B: m.cfa.at(y, x) = src.b.at(y, x); break;
            }
        }
    }
    return m;
}

PixelSets pixel_sets(int height, int width, BayerLayout layout) {
    if (height < 2 || width < 2) throw DataError("pixel_sets: grid must be at least 2x2");
    PixelSets s;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            switch (channel_at(layout, y, x)) {
                case CfaChannel::R: s.r.emplace_back(y, x); break;
                case CfaChannel::G: s.g.emplace_back(y, x); break;
                case CfaChannel::B: s.b.emplace_back(y, x); break;
            }
        }
    }
    return s;
}

double psnr(const PlaneImage& a, const PlaneImage& b, double peak) {
    if (!a.same_shape(b)) throw DataError("psnr: shape mismatch");
    double count = 0.0;
    const double sum = mse_accumulate(a, b, 0, count);
    return psnr_from(sum, count, peak);
}

ChannelPsnr psnr_report(const RgbImage& truth, const RgbImage& est, int crop, double peak) {
    if (!truth.r.same_shape(est.r) || !truth.g.same_shape(est.g) || !truth.b.same_shape(est.b))
        throw DataError("psnr_report: shape mismatch");
    if (crop < 0 || 2 * crop >= std::min(truth.height(), truth.width()))
        throw DataError("psnr_report: crop too large");
    ChannelPsnr out;
    double nr = 0.0, ng = 0.0, nb = 0.0;
    const double sr = mse_accumulate(truth.r, est.r, crop, nr);
    const double sg = mse_accumulate(truth.g, est.g, crop, ng);
    const double sb = mse_accumulate(truth.b, est.b, crop, nb);
    out.r = psnr_from(sr, nr, peak);
    out.g = psnr_from(sg, ng, peak);
    out.b = psnr_from(sb, nb, peak);
    out.cpsnr = psnr_from(sr + sg + sb, nr + ng + nb, peak);
    return out;
}

PlaneImage clip(const PlaneImage& x) {
    PlaneImage out = x;
    for (double& v : out.data) v = std::clamp(v, 0.0, 255.0);
    return out;
}

RgbImage clip(const RgbImage& x) {
    RgbImage out;
    out.r = clip(x.r);
    out.g = clip(x.g);
    out.b = clip(x.b);
    return out;
}

std::vector<RgbImage> extract_patches(const RgbImage& img, int size) {
    if (size < 2) throw DataError("extract_patches: size must be >= 2");
    std::vector<RgbImage> patches;
    const int ny = img.height() / size;
    const int nx = img.width() / size;
    for (int ty = 0; ty < ny; ++ty) {
        for (int tx = 0; tx < nx; ++tx) {
            RgbImage p(size, size);
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    p.r.at(y, x) = img.r.at(ty * size + y, tx * size + x);
                    p.g.at(y, x) = img.g.at(ty * size + y, tx * size + x);
                    p.b.at(y, x) = img.b.at(ty * size + y, tx * size + x);
                }
            }
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

}  // namespace cbcd
