#pragma once

// Dark-channel-prior baseline dehazing, plus the retrofit path that keeps the
// classical transmission estimate but swaps the scalar atmospheric light for
// a per-pixel map.

#include "hazelab/haze.hpp"
#include "hazelab/image.hpp"

namespace hazelab::dcp {

struct DcpParams {
    int patch = 15;                   // odd window size >= 3
    float omega = 0.95f;              // haze retention factor, (0, 1]
    float t0 = 0.1f;                  // transmission floor, (0, 1)
    float airlight_fraction = 0.001f; // top dark-channel share, (0, 0.05]
};

void validate_params(const DcpParams& p);

// Per-pixel min over channels, then min over a patch window with
// edge-replicated padding.
ScalarField dark_channel(const Image& img, int patch);

// Among the airlight_fraction brightest dark-channel pixels, the input pixel
// with maximum channel sum. Ties break toward the smallest row-major index.
haze::Rgb estimate_airlight_scalar(const Image& img, const DcpParams& params);

// t = 1 - omega * dark_channel(I / A), clamped to [t0, 1].
haze::TransmissionMap dcp_transmission(const Image& img, haze::Rgb a, const DcpParams& params);

struct DcpResult {
    Image j;  // unclamped; clamp on 8-bit export only
    haze::TransmissionMap t;
    haze::Rgb a;
};

DcpResult dcp_dehaze(const Image& img, const DcpParams& params = {});

// Pixel-wise inversion with a supplied light map and a given transmission;
// a constant map reproduces the scalar inversion bit-for-bit.
Image retrofit_dehaze(const Image& img, const haze::TransmissionMap& t,
                      const haze::LightMap& a_map,
                      float t_floor = haze::kTransmissionFloor);

}  // namespace hazelab::dcp
