#include "hazelab/dcp.hpp"

#include <algorithm>
#include <numeric>

#include "hazelab/error.hpp"
#include "hazelab/parallel.hpp"

namespace hazelab::dcp {

void validate_params(const DcpParams& p) {
    if (p.patch < 3 || p.patch % 2 == 0)
        fail(ErrorCode::Usage, "dcp params: patch must be odd and >= 3");
    if (!(p.omega > 0.f && p.omega <= 1.f))
        fail(ErrorCode::Usage, "dcp params: omega must lie in (0, 1]");
    if (!(p.t0 > 0.f && p.t0 < 1.f))
        fail(ErrorCode::Usage, "dcp params: t0 must lie in (0, 1)");
    if (!(p.airlight_fraction > 0.f && p.airlight_fraction <= 0.05f))
        fail(ErrorCode::Usage, "dcp params: airlight fraction must lie in (0, 0.05]");
}

ScalarField dark_channel(const Image& img, int patch) {
    validate_image(img, "dark_channel input");
    if (patch < 3 || patch % 2 == 0)
        fail(ErrorCode::Usage, "dark_channel: patch must be odd and >= 3");
    const int h = img.height, w = img.width, r = patch / 2;

    // Channel minimum, then a separable window min. Edge-replicated padding is
    // equivalent to clamping window coordinates.
    ScalarField cmin(h, w), rowmin(h, w), out(h, w);
    parallel_for(h, [&](int y) {
        for (int x = 0; x < w; ++x)
            cmin.at(y, x) = std::min({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)});
    });
    parallel_for(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            float m = cmin.at(y, std::clamp(x - r, 0, w - 1));
            for (int dx = -r + 1; dx <= r; ++dx)
                m = std::min(m, cmin.at(y, std::clamp(x + dx, 0, w - 1)));
            rowmin.at(y, x) = m;
        }
    });
    parallel_for(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            float m = rowmin.at(std::clamp(y - r, 0, h - 1), x);
            for (int dy = -r + 1; dy <= r; ++dy)
                m = std::min(m, rowmin.at(std::clamp(y + dy, 0, h - 1), x));
            out.at(y, x) = m;
        }
    });
    return out;
}

haze::Rgb estimate_airlight_scalar(const Image& img, const DcpParams& params) {
    validate_params(params);
    ScalarField dark = dark_channel(img, params.patch);
    const size_t n = dark.data.size();
    size_t take = std::max<size_t>(1, size_t(double(params.airlight_fraction) * double(n)));

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (dark.data[a] != dark.data[b]) return dark.data[a] > dark.data[b];
        return a < b;
    });

    size_t best = idx[0];
    float best_sum = -1.f;
    for (size_t k = 0; k < take; ++k) {
        size_t p = idx[k];
        float s = img.data[p * 3] + img.data[p * 3 + 1] + img.data[p * 3 + 2];
        if (s > best_sum || (s == best_sum && p < best)) {
            best_sum = s;
            best = p;
        }
    }
    return {img.data[best * 3], img.data[best * 3 + 1], img.data[best * 3 + 2]};
}

haze::TransmissionMap dcp_transmission(const Image& img, haze::Rgb a, const DcpParams& params) {
    validate_params(params);
    if (!(a.r > 0.f && a.g > 0.f && a.b > 0.f))
        fail(ErrorCode::Numeric, "dcp_transmission: atmospheric light must be > 0");
    Image norm(img.height, img.width);
    parallel_for(img.height, [&](int y) {
        for (int x = 0; x < img.width; ++x) {
            norm.at(y, x, 0) = img.at(y, x, 0) / a.r;
            norm.at(y, x, 1) = img.at(y, x, 1) / a.g;
            norm.at(y, x, 2) = img.at(y, x, 2) / a.b;
        }
    });
    ScalarField dark = dark_channel(norm, params.patch);
    haze::TransmissionMap t(img.height, img.width);
    parallel_for(img.height, [&](int y) {
        for (int x = 0; x < img.width; ++x)
            t.at(y, x) = std::clamp(1.f - params.omega * dark.at(y, x), params.t0, 1.f);
    });
    return t;
}

DcpResult dcp_dehaze(const Image& img, const DcpParams& params) {
    DcpResult res;
    res.a = estimate_airlight_scalar(img, params);
    res.t = dcp_transmission(img, res.a, params);
    res.j = haze::dehaze_scalar(img, res.t, res.a);
    return res;
}

Image retrofit_dehaze(const Image& img, const haze::TransmissionMap& t,
                      const haze::LightMap& a_map, float t_floor) {
    return haze::dehaze_map(img, t, a_map, t_floor);
}

}  // namespace hazelab::dcp
