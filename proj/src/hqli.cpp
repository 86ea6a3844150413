// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/hqli.hpp"

#include <cmath>

namespace cbcd {

namespace {

using Stencil = std::array<std::array<double, 5>, 5>;

// Symmetric mirror: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
inline int mirror(int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

// Padded CFA raster; 2 pixels of mirrored border on each side.
struct Padded {
    int h, w;
    std::vector<double> buf;  // (h+4) x (w+4)

    explicit Padded(const PlaneImage& p) : h(p.height), w(p.width) {
        buf.resize(static_cast<std::size_t>(h + 4) * (w + 4));
        for (int y = -2; y < h + 2; ++y)
            for (int x = -2; x < w + 2; ++x)
                buf[static_cast<std::size_t>(y + 2) * (w + 4) + (x + 2)] =
                    p.at(mirror(y, h), mirror(x, w));
    }
    double at(int y, int x) const {
        return buf[static_cast<std::size_t>(y + 2) * (w + 4) + (x + 2)];
    }
};

// Row-major accumulation over the 5x5 window, one division by 8 at the end.
// The brute-force oracle in the test suite uses the same canonical order, so
// results compare bit-exactly in double precision.
inline double apply(const Stencil& s, const Padded& p, int y, int x) {
    double acc = 0.0;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) acc += s[dy + 2][dx + 2] * p.at(y + dy, x + dx);
    return acc / HqliKernels::divisor;
}

}  // namespace

const HqliKernels& HqliKernels::canonical() {
    static const HqliKernels k = [] {
        HqliKernels kk{};
        kk.green_at_rb = {{{0, 0, -1, 0, 0},
                           {0, 0, 2, 0, 0},
                           {-1, 2, 4, 2, -1},
                           {0, 0, 2, 0, 0},
                           {0, 0, -1, 0, 0}}};
        kk.chroma_row = {{{0, 0, 0.5, 0, 0},
                          {0, -1, 0, -1, 0},
                          {-1, 4, 5, 4, -1},
                          {0, -1, 0, -1, 0},
                          {0, 0, 0.5, 0, 0}}};
        kk.chroma_col = {{{0, 0, -1, 0, 0},
                          {0, -1, 4, -1, 0},
                          {0.5, 0, 5, 0, 0.5},
                          {0, -1, 4, -1, 0},
                          {0, 0, -1, 0, 0}}};
        kk.chroma_cross = {{{0, 0, -1.5, 0, 0},
                            {0, 2, 0, 2, 0},
                            {-1.5, 0, 6, 0, -1.5},
                            {0, 2, 0, 2, 0},
                            {0, 0, -1.5, 0, 0}}};
        return kk;
    }();
    return k;
}

InitPlanes hqli(const MosaicImage& m, const HqliOptions& opts) {
    const int h = m.cfa.height, w = m.cfa.width;
    if (h < 5 || w < 5) throw DataError("hqli: image must be at least 5x5");

    const HqliKernels& k = HqliKernels::canonical();
    const Padded pad(m.cfa);
    InitPlanes out{PlaneImage(h, w), PlaneImage(h, w), PlaneImage(h, w)};

    // Row parity of the R samples decides which chroma stencil applies at
    // green sites; B sites mirror the R logic.
    int r_row = 0;
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x)
            if (channel_at(m.layout, y, x) == CfaChannel::R) r_row = y;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = m.cfa.at(y, x);
            switch (channel_at(m.layout, y, x)) {
                case CfaChannel::R:
                    out.r0.at(y, x) = v;
                    out.g0.at(y, x) = apply(k.green_at_rb, pad, y, x);
                    out.b0.at(y, x) = apply(k.chroma_cross, pad, y, x);
                    break;
                case CfaChannel::B:
                    out.b0.at(y, x) = v;
                    out.g0.at(y, x) = apply(k.green_at_rb, pad, y, x);
                    out.r0.at(y, x) = apply(k.chroma_cross, pad, y, x);
                    break;
                case CfaChannel::G:
                    out.g0.at(y, x) = v;
                    if ((y & 1) == r_row) {
                        // green pixel in an R row: R neighbours are horizontal
                        out.r0.at(y, x) = apply(k.chroma_row, pad, y, x);
                        out.b0.at(y, x) = apply(k.chroma_col, pad, y, x);
                    } else {
                        out.r0.at(y, x) = apply(k.chroma_col, pad, y, x);
                        out.b0.at(y, x) = apply(k.chroma_row, pad, y, x);
                    }
                    break;
            }
        }
    }
    if (opts.clip_output) {
        out.r0 = clip(out.r0);
        out.g0 = clip(out.g0);
        out.b0 = clip(out.b0);
    }
    return out;
}

std::pair<PlaneImage, PlaneImage> difference_planes(const PlaneImage& r0, const PlaneImage& g0,
                                                    const PlaneImage& b0) {
    if (!g0.same_shape(r0) || !g0.same_shape(b0))
        throw DataError("difference_planes: shape mismatch");
    PlaneImage gr(g0.height, g0.width), gb(g0.height, g0.width);
    for (std::size_t i = 0; i < g0.size(); ++i) {
        gr.data[i] = g0.data[i] - r0.data[i];
        gb.data[i] = g0.data[i] - b0.data[i];
    }
    return {std::move(gr), std::move(gb)};
}

}  // namespace cbcd
