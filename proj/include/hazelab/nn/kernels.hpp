#pragma once

// Data-parallel operator kernels, templated on the scalar type (float for the
// training pipeline, double for the gradient-check shadow). Every parallel
// loop writes disjoint output elements and every accumulation runs in a fixed
// serial order, so results are bit-identical for any OpenMP thread count.
// Backward kernels accumulate (+=) into their output buffers.

#include <algorithm>
#include <cstddef>

namespace hazelab::nn::kernels {

struct ConvAttrs {
    int kernel = 3;
    int stride = 1;
    int padding = 1;
    int dilation = 1;
};

inline int conv_out_dim(int in, const ConvAttrs& a) {
    return (in + 2 * a.padding - a.dilation * (a.kernel - 1) - 1) / a.stride + 1;
}

// weight layout [oc][ic][k][k], bias [oc] (nullable)
//
// The stride-1 path runs tap-stationary: for each weight tap the inner loop
// is a contiguous multiply-add sweep over the output row. Per output element
// the accumulation order is (ic, ky, kx) with the bias first, the same order
// the serial reference uses, so results stay bit-identical.
template <typename T>
void conv2d_forward(const T* in, int n, int ic, int ih, int iw, const T* w, const T* b,
                    int oc, const ConvAttrs& a, T* out, int oh, int ow) {
    const int k = a.kernel;
    const int jobs = n * oc * oh;
#pragma omp parallel for schedule(static)
    for (int job = 0; job < jobs; ++job) {
        const int oy = job % oh;
        const int o = (job / oh) % oc;
        const int nn = job / (oh * oc);
        T* orow = out + ((size_t(nn) * oc + o) * oh + oy) * ow;
        const T bias = b ? b[o] : T(0);
        for (int ox = 0; ox < ow; ++ox) orow[ox] = bias;
        if (a.stride == 1) {
            for (int i = 0; i < ic; ++i) {
                const T* iplane = in + (size_t(nn) * ic + i) * ih * size_t(iw);
                const T* wrow = w + ((size_t(o) * ic + i) * k) * k;
                for (int ky = 0; ky < k; ++ky) {
                    int iy = oy - a.padding + ky * a.dilation;
                    if (iy < 0 || iy >= ih) continue;
                    const T* irow = iplane + size_t(iy) * iw;
                    for (int kx = 0; kx < k; ++kx) {
                        const T wv = wrow[ky * k + kx];
                        const int off = kx * a.dilation - a.padding;  // ix = ox + off
                        const int lo = std::max(0, -off);
                        const int hi = std::min(ow, iw - off);
                        for (int ox = lo; ox < hi; ++ox) orow[ox] += wv * irow[ox + off];
                    }
                }
            }
        } else {
            for (int ox = 0; ox < ow; ++ox) {
                T acc = orow[ox];
                for (int i = 0; i < ic; ++i) {
                    const T* iplane = in + (size_t(nn) * ic + i) * ih * size_t(iw);
                    const T* wrow = w + ((size_t(o) * ic + i) * k) * k;
                    for (int ky = 0; ky < k; ++ky) {
                        int iy = oy * a.stride - a.padding + ky * a.dilation;
                        if (iy < 0 || iy >= ih) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int ix = ox * a.stride - a.padding + kx * a.dilation;
                            if (ix < 0 || ix >= iw) continue;
                            acc += iplane[size_t(iy) * iw + ix] * wrow[ky * k + kx];
                        }
                    }
                }
                orow[ox] = acc;
            }
        }
    }
}

template <typename T>
void conv2d_backward_input(const T* up, int n, int oc, int oh, int ow, const T* w, int ic,
                           const ConvAttrs& a, T* din, int ih, int iw) {
    const int k = a.kernel;
    const int jobs = n * ic * ih;
#pragma omp parallel for schedule(static)
    for (int job = 0; job < jobs; ++job) {
        const int iy = job % ih;
        const int i = (job / ih) % ic;
        const int nn = job / (ih * ic);
        T* drow = din + ((size_t(nn) * ic + i) * ih + iy) * iw;
        if (a.stride == 1) {
            for (int o = 0; o < oc; ++o) {
                const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                const T* wrow = w + ((size_t(o) * ic + i) * k) * k;
                for (int ky = 0; ky < k; ++ky) {
                    int oy = iy + a.padding - ky * a.dilation;
                    if (oy < 0 || oy >= oh) continue;
                    const T* urow = uplane + size_t(oy) * ow;
                    for (int kx = 0; kx < k; ++kx) {
                        const T wv = wrow[ky * k + kx];
                        const int off = a.padding - kx * a.dilation;  // ox = ix + off
                        const int lo = std::max(0, -off);
                        const int hi = std::min(iw, ow - off);
                        for (int ix = lo; ix < hi; ++ix) drow[ix] += wv * urow[ix + off];
                    }
                }
            }
        } else {
            for (int ix = 0; ix < iw; ++ix) {
                T acc = T(0);
                for (int o = 0; o < oc; ++o) {
                    const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                    const T* wrow = w + ((size_t(o) * ic + i) * k) * k;
                    for (int ky = 0; ky < k; ++ky) {
                        int ny = iy + a.padding - ky * a.dilation;
                        if (ny % a.stride != 0) continue;
                        int oy = ny / a.stride;
                        if (oy < 0 || oy >= oh) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int nx = ix + a.padding - kx * a.dilation;
                            if (nx % a.stride != 0) continue;
                            int ox = nx / a.stride;
                            if (ox < 0 || ox >= ow) continue;
                            acc += uplane[size_t(oy) * ow + ox] * wrow[ky * k + kx];
                        }
                    }
                }
                drow[ix] += acc;
            }
        }
    }
}

template <typename T>
void conv2d_backward_params(const T* up, const T* in, int n, int ic, int ih, int iw, int oc,
                            const ConvAttrs& a, int oh, int ow, T* dw, T* db) {
    const int k = a.kernel;
#pragma omp parallel for collapse(2) schedule(static)
    for (int o = 0; o < oc; ++o)
        for (int i = 0; i < ic; ++i)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    T acc = T(0);
                    for (int nn = 0; nn < n; ++nn) {
                        const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                        const T* iplane = in + (size_t(nn) * ic + i) * ih * size_t(iw);
                        for (int oy = 0; oy < oh; ++oy) {
                            int iy = oy * a.stride - a.padding + ky * a.dilation;
                            if (iy < 0 || iy >= ih) continue;
                            for (int ox = 0; ox < ow; ++ox) {
                                int ix = ox * a.stride - a.padding + kx * a.dilation;
                                if (ix < 0 || ix >= iw) continue;
                                acc += uplane[size_t(oy) * ow + ox] * iplane[size_t(iy) * iw + ix];
                            }
                        }
                    }
                    dw[((size_t(o) * ic + i) * k + ky) * k + kx] += acc;
                }
    if (db) {
#pragma omp parallel for schedule(static)
        for (int o = 0; o < oc; ++o) {
            T acc = T(0);
            for (int nn = 0; nn < n; ++nn) {
                const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                for (size_t q = 0; q < size_t(oh) * ow; ++q) acc += uplane[q];
            }
            db[o] += acc;
        }
    }
}

// Transposed convolution, stride 2, even kernel, padding (k-2)/2, so the
// output is exactly twice the input in both spatial dims.
// weight layout [ic][oc][k][k], bias [oc].
template <typename T>
void conv_transpose2d_forward(const T* in, int n, int ic, int ih, int iw, const T* w,
                              const T* b, int oc, int k, T* out, int oh, int ow) {
    const int pad = (k - 2) / 2;
#pragma omp parallel for collapse(3) schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (int o = 0; o < oc; ++o)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    T acc = b ? b[o] : T(0);
                    for (int i = 0; i < ic; ++i) {
                        const T* iplane = in + (size_t(nn) * ic + i) * ih * size_t(iw);
                        const T* wrow = w + ((size_t(i) * oc + o) * k) * k;
                        for (int ky = 0; ky < k; ++ky) {
                            int ny = oy + pad - ky;
                            if (ny % 2 != 0) continue;
                            int iy = ny / 2;
                            if (iy < 0 || iy >= ih) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                int nx = ox + pad - kx;
                                if (nx % 2 != 0) continue;
                                int ix = nx / 2;
                                if (ix < 0 || ix >= iw) continue;
                                acc += iplane[size_t(iy) * iw + ix] * wrow[ky * k + kx];
                            }
                        }
                    }
                    out[((size_t(nn) * oc + o) * oh + oy) * ow + ox] = acc;
                }
}

template <typename T>
void conv_transpose2d_backward_input(const T* up, int n, int oc, int oh, int ow, const T* w,
                                     int ic, int k, T* din, int ih, int iw) {
    const int pad = (k - 2) / 2;
#pragma omp parallel for collapse(3) schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (int i = 0; i < ic; ++i)
            for (int iy = 0; iy < ih; ++iy)
                for (int ix = 0; ix < iw; ++ix) {
                    T acc = T(0);
                    for (int o = 0; o < oc; ++o) {
                        const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                        const T* wrow = w + ((size_t(i) * oc + o) * k) * k;
                        for (int ky = 0; ky < k; ++ky) {
                            int oy = iy * 2 - pad + ky;
                            if (oy < 0 || oy >= oh) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                int ox = ix * 2 - pad + kx;
                                if (ox < 0 || ox >= ow) continue;
                                acc += uplane[size_t(oy) * ow + ox] * wrow[ky * k + kx];
                            }
                        }
                    }
                    din[((size_t(nn) * ic + i) * ih + iy) * iw + ix] += acc;
                }
}

template <typename T>
void conv_transpose2d_backward_params(const T* up, const T* in, int n, int ic, int ih, int iw,
                                      int oc, int k, int oh, int ow, T* dw, T* db) {
    const int pad = (k - 2) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (int i = 0; i < ic; ++i)
        for (int o = 0; o < oc; ++o)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    T acc = T(0);
                    for (int nn = 0; nn < n; ++nn) {
                        const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                        const T* iplane = in + (size_t(nn) * ic + i) * ih * size_t(iw);
                        for (int iy = 0; iy < ih; ++iy) {
                            int oy = iy * 2 - pad + ky;
                            if (oy < 0 || oy >= oh) continue;
                            for (int ix = 0; ix < iw; ++ix) {
                                int ox = ix * 2 - pad + kx;
                                if (ox < 0 || ox >= ow) continue;
                                acc += uplane[size_t(oy) * ow + ox] * iplane[size_t(iy) * iw + ix];
                            }
                        }
                    }
                    dw[((size_t(i) * oc + o) * k + ky) * k + kx] += acc;
                }
    if (db) {
#pragma omp parallel for schedule(static)
        for (int o = 0; o < oc; ++o) {
            T acc = T(0);
            for (int nn = 0; nn < n; ++nn) {
                const T* uplane = up + (size_t(nn) * oc + o) * oh * size_t(ow);
                for (size_t q = 0; q < size_t(oh) * ow; ++q) acc += uplane[q];
            }
            db[o] += acc;
        }
    }
}

// 2x2 max pooling with stride 2; argmax records the flat input index. Ties
// break toward the lowest index (first strict maximum in scan order).
template <typename T>
void maxpool2_forward(const T* in, int n, int c, int ih, int iw, T* out, int* argmax) {
    const int oh = ih / 2, ow = iw / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (int ch = 0; ch < c; ++ch) {
            const T* iplane = in + (size_t(nn) * c + ch) * ih * size_t(iw);
            size_t ibase = (size_t(nn) * c + ch) * ih * size_t(iw);
            T* oplane = out + (size_t(nn) * c + ch) * oh * size_t(ow);
            int* aplane = argmax + (size_t(nn) * c + ch) * oh * size_t(ow);
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    T best = iplane[size_t(oy * 2) * iw + ox * 2];
                    int besti = oy * 2 * iw + ox * 2;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            int iy = oy * 2 + dy, ix = ox * 2 + dx;
                            T v = iplane[size_t(iy) * iw + ix];
                            if (v > best) {
                                best = v;
                                besti = iy * iw + ix;
                            }
                        }
                    oplane[size_t(oy) * ow + ox] = best;
                    aplane[size_t(oy) * ow + ox] = int(ibase + size_t(besti));
                }
        }
}

template <typename T>
void maxpool2_backward(const T* up, const int* argmax, int n, int c, int oh, int ow, T* din) {
    // Pool windows are disjoint, so the scatter below is race-free.
#pragma omp parallel for collapse(2) schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (int ch = 0; ch < c; ++ch) {
            size_t base = (size_t(nn) * c + ch) * oh * size_t(ow);
            for (size_t q = 0; q < size_t(oh) * ow; ++q)
                din[size_t(argmax[base + q])] += up[base + q];
        }
}

// k x k min pooling, stride 1, same padding (out-of-bounds positions are
// ignored, which matches edge-replicated padding for a min). Ties break
// toward the lowest row-major in-bounds index.
template <typename T>
void minpool_forward(const T* in, int n, int c, int ih, int iw, int k, T* out, int* argmin) {
    const int r = k / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (int ch = 0; ch < c; ++ch) {
            const T* iplane = in + (size_t(nn) * c + ch) * ih * size_t(iw);
            size_t ibase = (size_t(nn) * c + ch) * ih * size_t(iw);
            T* oplane = out + (size_t(nn) * c + ch) * ih * size_t(iw);
            int* aplane = argmin + (size_t(nn) * c + ch) * ih * size_t(iw);
            for (int y = 0; y < ih; ++y)
                for (int x = 0; x < iw; ++x) {
                    bool first = true;
                    T best = T(0);
                    int besti = 0;
                    for (int dy = -r; dy <= r; ++dy) {
                        int iy = y + dy;
                        if (iy < 0 || iy >= ih) continue;
                        for (int dx = -r; dx <= r; ++dx) {
                            int ix = x + dx;
                            if (ix < 0 || ix >= iw) continue;
                            T v = iplane[size_t(iy) * iw + ix];
                            if (first || v < best) {
                                first = false;
                                best = v;
                                besti = iy * iw + ix;
                            }
                        }
                    }
                    oplane[size_t(y) * iw + x] = best;
                    aplane[size_t(y) * iw + x] = int(ibase + size_t(besti));
                }
        }
}

template <typename T>
void minpool_backward(const T* up, const int* argmin, int n, int c, int ih, int iw, int k,
                      T* din) {
    const int r = k / 2;
    // Gather formulation: windows overlap, so each input cell sums the
    // upstream of every window whose argmin points at it.
#pragma omp parallel for collapse(2) schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (int ch = 0; ch < c; ++ch) {
            size_t base = (size_t(nn) * c + ch) * ih * size_t(iw);
            for (int y = 0; y < ih; ++y)
                for (int x = 0; x < iw; ++x) {
                    int flat = int(base + size_t(y) * iw + x);
                    T acc = T(0);
                    for (int dy = -r; dy <= r; ++dy) {
                        int oy = y + dy;
                        if (oy < 0 || oy >= ih) continue;
                        for (int dx = -r; dx <= r; ++dx) {
                            int ox = x + dx;
                            if (ox < 0 || ox >= iw) continue;
                            size_t q = base + size_t(oy) * iw + ox;
                            if (argmin[q] == flat) acc += up[q];
                        }
                    }
                    din[base + size_t(y) * iw + x] += acc;
                }
        }
}

// Per-pixel minimum over channels: (N,C,H,W) -> (N,1,H,W). Ties break toward
// the lowest channel index.
template <typename T>
void channel_min_forward(const T* in, int n, int c, int ih, int iw, T* out, int* argc) {
    const size_t plane = size_t(ih) * iw;
#pragma omp parallel for schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (size_t q = 0; q < plane; ++q) {
            T best = in[size_t(nn) * c * plane + q];
            int bc = 0;
            for (int ch = 1; ch < c; ++ch) {
                T v = in[(size_t(nn) * c + ch) * plane + q];
                if (v < best) {
                    best = v;
                    bc = ch;
                }
            }
            out[size_t(nn) * plane + q] = best;
            argc[size_t(nn) * plane + q] = bc;
        }
}

template <typename T>
void channel_min_backward(const T* up, const int* argc, int n, int c, int ih, int iw, T* din) {
    const size_t plane = size_t(ih) * iw;
#pragma omp parallel for schedule(static)
    for (int nn = 0; nn < n; ++nn)
        for (size_t q = 0; q < plane; ++q)
            din[(size_t(nn) * c + argc[size_t(nn) * plane + q]) * plane + q] +=
                up[size_t(nn) * plane + q];
}

// Elementwise ops. Subgradient is 0 at the relu/brelu kinks.
template <typename T>
void relu_forward(const T* in, size_t count, T* out) {
    for (size_t i = 0; i < count; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

template <typename T>
void relu_backward(const T* up, const T* in, size_t count, T* din) {
    for (size_t i = 0; i < count; ++i)
        if (in[i] > T(0)) din[i] += up[i];
}

template <typename T>
void brelu_forward(const T* in, size_t count, T* out) {
    for (size_t i = 0; i < count; ++i) out[i] = std::clamp(in[i], T(0), T(1));
}

template <typename T>
void brelu_backward(const T* up, const T* in, size_t count, T* din) {
    for (size_t i = 0; i < count; ++i)
        if (in[i] > T(0) && in[i] < T(1)) din[i] += up[i];
}

}  // namespace hazelab::nn::kernels
