#pragma once

// Serial reference implementations of the parallel kernels. These keep the
// same accumulation order as the OpenMP versions so outputs are bit-identical;
// tests compare the two and the benchmark tool times them against each other.

#include "hazelab/colorspace.hpp"
#include "hazelab/image.hpp"
#include "hazelab/nn/kernels.hpp"

namespace hazelab::ref {

template <typename T>
void conv2d_forward(const T* in, int n, int ic, int ih, int iw, const T* w, const T* b,
                    int oc, const nn::kernels::ConvAttrs& a, T* out, int oh, int ow) {
    const int k = a.kernel;
    for (int nn = 0; nn < n; ++nn)
        for (int o = 0; o < oc; ++o)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    T acc = b ? b[o] : T(0);
                    for (int i = 0; i < ic; ++i)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                int iy = oy * a.stride - a.padding + ky * a.dilation;
                                int ix = ox * a.stride - a.padding + kx * a.dilation;
                                if (iy < 0 || iy >= ih || ix < 0 || ix >= iw) continue;
                                acc += in[((size_t(nn) * ic + i) * ih + iy) * iw + ix] *
                                       w[((size_t(o) * ic + i) * k + ky) * k + kx];
                            }
                    out[((size_t(nn) * oc + o) * oh + oy) * ow + ox] = acc;
                }
}

template <typename T>
void conv2d_backward_input(const T* up, int n, int oc, int oh, int ow, const T* w, int ic,
                           const nn::kernels::ConvAttrs& a, T* din, int ih, int iw) {
    const int k = a.kernel;
    for (int nn = 0; nn < n; ++nn)
        for (int i = 0; i < ic; ++i)
            for (int iy = 0; iy < ih; ++iy)
                for (int ix = 0; ix < iw; ++ix) {
                    T acc = T(0);
                    for (int o = 0; o < oc; ++o)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx) {
                                int ny = iy + a.padding - ky * a.dilation;
                                int nx = ix + a.padding - kx * a.dilation;
                                if (ny % a.stride != 0 || nx % a.stride != 0) continue;
                                int oy = ny / a.stride, ox = nx / a.stride;
                                if (oy < 0 || oy >= oh || ox < 0 || ox >= ow) continue;
                                acc += up[((size_t(nn) * oc + o) * oh + oy) * ow + ox] *
                                       w[((size_t(o) * ic + i) * k + ky) * k + kx];
                            }
                    din[((size_t(nn) * ic + i) * ih + iy) * iw + ix] += acc;
                }
}

// Brute-force windowed dark channel: min over channels and the full patch for
// every pixel, with clamped (edge-replicated) coordinates.
ScalarField dark_channel(const Image& img, int patch);

// Serial pixel-by-pixel conversion chain.
color::LabImage rgb_to_lab(const Image& img, color::LabMode mode);

}  // namespace hazelab::ref
