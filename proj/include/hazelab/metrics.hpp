#pragma once

// Evaluation metrics: PSNR (peak 1.0), single-scale SSIM (11x11 Gaussian
// window, sigma 1.5, K1=0.01, K2=0.03, per channel then averaged) and
// CIEDE2000 with kL=kC=kH=1.

#include <limits>

#include "hazelab/colorspace.hpp"
#include "hazelab/image.hpp"

namespace hazelab::metrics {

// 10*log10(1/MSE) over all channels and pixels; +infinity when MSE == 0.
double psnr(const Image& a, const Image& b);

// Mean SSIM over valid window positions; requires min(H, W) >= 11.
double ssim(const Image& a, const Image& b);

// One CIEDE2000 difference for a single Lab pair.
double ciede2000_pair(double l1, double a1, double b1, double l2, double a2, double b2);

struct Ciede2000Result {
    double mean = 0.0;
    ScalarField per_pixel;
};

Ciede2000Result ciede2000(const color::LabImage& a, const color::LabImage& b);

}  // namespace hazelab::metrics
