#pragma once

// RGB -> XYZ -> CIELAB conversion chain.
//
// The f() nonlinearity is applied directly to the XYZ values — there is no
// white-point division anywhere in this chain. As a consequence neutral grays
// map to nonzero (a, b): rgb(1,1,1) converts to roughly (100, -8.48, -5.70).
// That is the documented behaviour of this pipeline, not a bug; metric
// consumers must compare like against like.

#include <vector>

#include "hazelab/error.hpp"
#include "hazelab/image.hpp"

namespace hazelab::color {

enum class LabMode {
    Exact,       // piecewise f: cube root above (6/29)^3, linear below
    Simplified,  // plain cube root everywhere (loss-side default)
};

inline constexpr double kRgbToXyz[3][3] = {
    {0.412, 0.358, 0.180},
    {0.213, 0.715, 0.072},
    {0.019, 0.119, 0.950},
};
inline constexpr double kLabThreshold = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
inline constexpr double kLabLinearSlope = (29.0 / 6.0) * (29.0 / 6.0) / 3.0;
inline constexpr double kLabLinearOffset = 4.0 / 29.0;

struct XyzImage {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // (X,Y,Z) triples

    XyzImage() = default;
    XyzImage(int h, int w) : height(h), width(w), data(size_t(h) * w * 3, 0.f) {}
};

struct LabImage {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // (L,a,b) triples

    LabImage() = default;
    LabImage(int h, int w) : height(h), width(w), data(size_t(h) * w * 3, 0.f) {}
};

namespace detail {

template <typename T>
inline void rgb_to_xyz_px(const T* rgb, T* xyz) {
    for (int r = 0; r < 3; ++r)
        xyz[r] = T(kRgbToXyz[r][0]) * rgb[0] + T(kRgbToXyz[r][1]) * rgb[1] +
                 T(kRgbToXyz[r][2]) * rgb[2];
}

template <typename T>
inline T lab_f(T t, LabMode mode) {
    if (t < T(0)) fail(ErrorCode::Numeric, "lab_f: negative input outside cube-root domain");
    if (mode == LabMode::Simplified) return std::cbrt(t);
    if (t > T(kLabThreshold)) return std::cbrt(t);
    return T(kLabLinearSlope) * t + T(kLabLinearOffset);
}

template <typename T>
inline void xyz_to_lab_px(const T* xyz, T* lab, LabMode mode) {
    T fx = lab_f(xyz[0], mode);
    T fy = lab_f(xyz[1], mode);
    T fz = lab_f(xyz[2], mode);
    lab[0] = T(116) * fy - T(16);
    lab[1] = T(500) * (fx - fy);
    lab[2] = T(200) * (fy - fz);
}

template <typename T>
inline void rgb_to_lab_px(const T* rgb, T* lab, LabMode mode) {
    T xyz[3];
    rgb_to_xyz_px(rgb, xyz);
    xyz_to_lab_px(xyz, lab, mode);
}

}  // namespace detail

XyzImage rgb_to_xyz(const Image& img);
double lab_f(double t, LabMode mode);
LabImage xyz_to_lab(const XyzImage& img, LabMode mode);
LabImage rgb_to_lab(const Image& img, LabMode mode);

}  // namespace hazelab::color
