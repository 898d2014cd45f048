#pragma once

// Loss family used for training and for the equivalence test suite:
//  - mse: mean squared difference over all elements, gradient 2(a-b)/count
//  - loss_j: image distance, linear (plain MSE) or in CIELAB (simplified f)
//  - loss_a_weighted: per-pixel (1 - 1/t)^2 weighted light-map distance
//  - fwb_loss: unweighted light-map distance in CIELAB with analytic gradient
//
// In the linear domain loss_j and loss_a_weighted agree exactly when the
// dehazed pair is generated from the same t and the two light maps; dropping
// the (1 - 1/t)^2 weight preserves the zero set whenever t < 1 everywhere.

#include <cmath>
#include <cstddef>

#include "hazelab/colorspace.hpp"
#include "hazelab/haze.hpp"
#include "hazelab/image.hpp"
#include "hazelab/tensor.hpp"

namespace hazelab::losses {

struct LossValue {
    double value = 0.0;
    ScalarField per_pixel;       // per-pixel mean contribution, when produced
    bool has_per_pixel = false;  // mean(per_pixel) == value when true
};

enum class Space { Linear, Lab };

namespace detail {

// Per-pixel CIELAB distance (simplified f) and gradient w.r.t. the estimated
// RGB triple. `floor` > 0 clamps channels below it (with zero gradient there)
// and counts the clamps; floor <= 0 means strict domain checking.
template <typename T>
inline T fwb_px(const T* est_rgb, const T* gt_rgb, T floor, long* floored,
                T* grad /* nullable, 3 */) {
    T est[3], gt[3];
    bool active[3] = {true, true, true};
    for (int c = 0; c < 3; ++c) {
        est[c] = est_rgb[c];
        gt[c] = gt_rgb[c];
        if (floor > T(0)) {
            if (est[c] < floor) {
                est[c] = floor;
                active[c] = false;
                if (floored) ++*floored;
            }
        } else if (!(est[c] > T(0)) || !(gt[c] > T(0))) {
            fail(ErrorCode::Numeric, "fwb_loss: nonpositive channel outside cube-root domain");
        }
    }
    T xyz_e[3], xyz_g[3];
    color::detail::rgb_to_xyz_px(est, xyz_e);
    color::detail::rgb_to_xyz_px(gt, xyz_g);
    T f_e[3], f_g[3];
    for (int c = 0; c < 3; ++c) {
        f_e[c] = std::cbrt(xyz_e[c]);
        f_g[c] = std::cbrt(xyz_g[c]);
    }
    // lab = K * f - (16,0,0); the offset cancels in the difference.
    T dlab[3];
    dlab[0] = T(116) * (f_e[1] - f_g[1]);
    dlab[1] = T(500) * ((f_e[0] - f_g[0]) - (f_e[1] - f_g[1]));
    dlab[2] = T(200) * ((f_e[1] - f_g[1]) - (f_e[2] - f_g[2]));
    T sq = dlab[0] * dlab[0] + dlab[1] * dlab[1] + dlab[2] * dlab[2];

    if (grad) {
        // d sq / d f_e = 2 * K^T * dlab
        T dfe[3];
        dfe[0] = T(2) * (T(500) * dlab[1]);
        dfe[1] = T(2) * (T(116) * dlab[0] - T(500) * dlab[1] + T(200) * dlab[2]);
        dfe[2] = T(2) * (T(-200) * dlab[2]);
        // chain through cbrt: d f / d xyz = xyz^(-2/3) / 3
        T dxyz[3];
        for (int c = 0; c < 3; ++c) {
            T u = xyz_e[c];
            dxyz[c] = dfe[c] / (T(3) * std::cbrt(u) * std::cbrt(u));
        }
        // chain through the RGB->XYZ matrix (transpose)
        for (int c = 0; c < 3; ++c) {
            T g = T(color::kRgbToXyz[0][c]) * dxyz[0] + T(color::kRgbToXyz[1][c]) * dxyz[1] +
                  T(color::kRgbToXyz[2][c]) * dxyz[2];
            grad[c] = active[c] ? g : T(0);
        }
    }
    return sq;
}

// Light-map CIELAB loss over `pixels` interleaved RGB triples with 1/(3*pixels)
// normalization. grad (same layout) receives d loss / d est when non-null.
template <typename T>
T fwb_loss_buf(const T* est, const T* gt, size_t pixels, T floor, long* floored, T* grad) {
    T norm = T(1) / (T(3) * T(pixels));
    double acc = 0.0;
    for (size_t p = 0; p < pixels; ++p) {
        T g[3];
        T sq = fwb_px(est + p * 3, gt + p * 3, floor, floored, grad ? g : nullptr);
        acc += double(sq);
        if (grad)
            for (int c = 0; c < 3; ++c) grad[p * 3 + c] = g[c] * norm;
    }
    return T(acc) * norm;
}

// Linear-domain weighted light-map loss: (1/(3*pixels)) * sum over pixels of
// (1 - 1/t)^2 * sum_c (est_c - gt_c)^2.
template <typename T>
T loss_a_weighted_linear_buf(const T* est, const T* gt, const T* t, size_t pixels) {
    double acc = 0.0;
    for (size_t p = 0; p < pixels; ++p) {
        T w = T(1) - T(1) / t[p];
        double sq = 0.0;
        for (int c = 0; c < 3; ++c) {
            double d = double(est[p * 3 + c]) - double(gt[p * 3 + c]);
            sq += d * d;
        }
        acc += double(w) * double(w) * sq;
    }
    return T(acc / (3.0 * double(pixels)));
}

template <typename T>
T mse_buf(const T* a, const T* b, size_t count) {
    double acc = 0.0;
    for (size_t i = 0; i < count; ++i) {
        double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return T(acc / double(count));
}

}  // namespace detail

LossValue mse(const Image& a, const Image& b);
LossValue mse(const Tensor4& a, const Tensor4& b);
Image mse_grad(const Image& a, const Image& b);      // d/d a
Tensor4 mse_grad(const Tensor4& a, const Tensor4& b);

// Eq-style image loss. Linear space is the plain per-element MSE; Lab space
// converts with the simplified cube-root f and rejects negative channels.
LossValue loss_j(const Image& est, const Image& gt, Space space);

// Weighted light-map loss; t == 1 contributes weight 0, t <= 0 is rejected.
LossValue loss_a_weighted(const haze::LightMap& est, const haze::LightMap& gt,
                          const haze::TransmissionMap& t, Space space);

// Unweighted CIELAB light-map loss (strict domain: channels must be > 0).
LossValue fwb_loss(const haze::LightMap& est, const haze::LightMap& gt);

struct FwbLossGrad {
    double value = 0.0;
    haze::LightMap grad;  // d value / d est
    long floored = 0;     // channels clamped by the domain floor
};

// domain_floor > 0 enables the training-time guard: channels below the floor
// are clamped with zero gradient and counted instead of raising an error.
FwbLossGrad fwb_loss_with_grad(const haze::LightMap& est, const haze::LightMap& gt,
                               double domain_floor = 0.0);

}  // namespace hazelab::losses
