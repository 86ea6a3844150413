// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "cbcd/nn.hpp"

namespace cbcd::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// Lowered input patches: one row per output pixel, 9*Cin columns ordered
// [ky][kx][ci]. Out-of-image taps are zero ("same" padding).
inline void im2col(const Tensor& x, int dilation, std::vector<double>& cols) {
    const int h = x.height, w = x.width, cin = x.channels;
    const std::size_t ncols = 9u * cin;
    cols.assign(static_cast<std::size_t>(h) * w * ncols, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            double* row = cols.data() + (static_cast<std::size_t>(y) * w + xx) * ncols;
            for (int ky = 0; ky < 3; ++ky) {
                const int sy = y + (ky - 1) * dilation;
                if (sy < 0 || sy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int sx = xx + (kx - 1) * dilation;
                    if (sx < 0 || sx >= w) continue;
                    const double* src = &x.data[(static_cast<std::size_t>(sy) * w + sx) * cin];
                    double* dst = row + (ky * 3 + kx) * cin;
                    for (int c = 0; c < cin; ++c) dst[c] = src[c];
                }
            }
        }
    }
}

// Scatter-add of lowered gradients back onto the input grid.
inline void col2im_add(const std::vector<double>& cols, int dilation, Tensor& dx) {
    const int h = dx.height, w = dx.width, cin = dx.channels;
    const std::size_t ncols = 9u * cin;
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            const double* row = cols.data() + (static_cast<std::size_t>(y) * w + xx) * ncols;
            for (int ky = 0; ky < 3; ++ky) {
                const int sy = y + (ky - 1) * dilation;
                if (sy < 0 || sy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int sx = xx + (kx - 1) * dilation;
                    if (sx < 0 || sx >= w) continue;
                    const double* src = row + (ky * 3 + kx) * cin;
                    double* dst = &dx.data[(static_cast<std::size_t>(sy) * w + sx) * cin];
                    for (int c = 0; c < cin; ++c) dst[c] += src[c];
                }
            }
        }
    }
}

// out = cols * W + bias, written straight into the HWC tensor.
inline void conv_forward_cols(const std::vector<double>& cols, const ConvParams& p, int cin,
                              int cout, Tensor& out) {
    const std::size_t npix = out.data.size() / cout;
    CMapMat a(cols.data(), static_cast<Eigen::Index>(npix), 9 * cin);
    CMapMat wm(p.w.data(), 9 * cin, cout);
    MapMat om(out.data.data(), static_cast<Eigen::Index>(npix), cout);
    om.noalias() = a * wm;
    om.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p.b.data(), cout);
}

inline void conv_forward(const Tensor& x, const ConvParams& p, int cin, int cout, int dilation,
                         Tensor& out, std::vector<double>& cols) {
    out = Tensor(x.height, x.width, cout);
    im2col(x, dilation, cols);
    conv_forward_cols(cols, p, cin, cout, out);
}

// dX from dOut (requires the layer's weights).
inline void conv_backward_data(const Tensor& dout, const ConvParams& p, int cin, int cout,
                               int dilation, Tensor& dx, std::vector<double>& dcols) {
    const std::size_t npix = static_cast<std::size_t>(dout.height) * dout.width;
    dcols.resize(npix * 9u * cin);
    CMapMat dom(dout.data.data(), static_cast<Eigen::Index>(npix), cout);
    CMapMat wm(p.w.data(), 9 * cin, cout);
    MapMat dc(dcols.data(), static_cast<Eigen::Index>(npix), 9 * cin);
    dc.noalias() = dom * wm.transpose();
    dx = Tensor(dout.height, dout.width, cin);
    col2im_add(dcols, dilation, dx);
}

// dW and db from the cached im2col of this layer's input and dOut.
inline void conv_backward_params(const std::vector<double>& cols, const Tensor& dout, int cin,
                                 int cout, ConvParams& grad) {
    const std::size_t npix = static_cast<std::size_t>(dout.height) * dout.width;
    CMapMat a(cols.data(), static_cast<Eigen::Index>(npix), 9 * cin);
    CMapMat dom(dout.data.data(), static_cast<Eigen::Index>(npix), cout);
    grad.w.assign(9u * cin * cout, 0.0);
    grad.b.assign(cout, 0.0);
    MapMat gw(grad.w.data(), 9 * cin, cout);
    gw.noalias() = a.transpose() * dom;
    Eigen::Map<Eigen::RowVectorXd>(grad.b.data(), cout) = dom.colwise().sum();
}

}  // namespace cbcd::detail
