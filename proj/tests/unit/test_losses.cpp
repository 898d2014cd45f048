#include "doctest.h"

#include <cmath>

#include "hazelab/losses.hpp"
#include "hazelab/rng.hpp"

#include "test_util.hpp"

using namespace hazelab;
using namespace hazelab::losses;

namespace {

haze::LightMap random_light_map(SplitMix64& rng, int h, int w, float lo = 0.24f,
                                float hi = 1.8f) {
    haze::LightMap m(h, w);
    for (auto& v : m.data) v = rng.uniform_f(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("mse examples and finite-difference gradient") {
    SplitMix64 rng(2);
    Image a = testutil::random_image(rng, 6, 6);
    CHECK(mse(a, a).value == 0.0);

    Image b = a;
    for (auto& v : b.data) v += 0.1f;
    CHECK(mse(a, b).value == doctest::Approx(0.01).epsilon(1e-4));

    // per-pixel field mean equals the loss
    LossValue lv = mse(a, b);
    double s = 0;
    for (float v : lv.per_pixel.data) s += v;
    CHECK(lv.value == doctest::Approx(s / lv.per_pixel.data.size()).epsilon(1e-6));

    // central finite differences in double
    std::vector<double> da(a.data.begin(), a.data.end());
    std::vector<double> db(b.data.begin(), b.data.end());
    const double h = 1e-5;
    for (int probe = 0; probe < 20; ++probe) {
        size_t i = rng.next_below(da.size());
        double saved = da[i];
        da[i] = saved + h;
        double lp = detail::mse_buf<double>(da.data(), db.data(), da.size());
        da[i] = saved - h;
        double lm = detail::mse_buf<double>(da.data(), db.data(), da.size());
        da[i] = saved;
        double fd = (lp - lm) / (2 * h);
        double analytic = 2.0 * (da[i] - db[i]) / double(da.size());
        CHECK(std::fabs(analytic - fd) / std::max(std::fabs(fd), 1e-9) < 1e-4);
    }

    Image c(6, 7, 0.f);
    CHECK_THROWS_AS(mse(a, c), Error);
}

TEST_CASE("loss_j in Lab space: zero, size invariance, single pixel") {
    SplitMix64 rng(3);
    Image a = testutil::random_image(rng, 5, 5);
    CHECK(loss_j(a, a, Space::Lab).value == 0.0);

    // Spatially constant inputs: the loss is a per-pixel quantity, so it is
    // invariant to image size.
    Image s1(2, 2, 0.3f), t1(2, 2, 0.6f);
    Image s2(9, 7, 0.3f), t2(9, 7, 0.6f);
    CHECK(loss_j(s1, t1, Space::Lab).value ==
          doctest::Approx(loss_j(s2, t2, Space::Lab).value).epsilon(1e-9));

    // Single pixel equals one third of the squared Lab distance.
    Image p1(1, 1), p2(1, 1);
    p1.data = {0.2f, 0.5f, 0.8f};
    p2.data = {0.6f, 0.3f, 0.1f};
    double lab1[3], lab2[3];
    double rgb1[3] = {0.2f, 0.5f, 0.8f}, rgb2[3] = {0.6f, 0.3f, 0.1f};
    color::detail::rgb_to_lab_px(rgb1, lab1, color::LabMode::Simplified);
    color::detail::rgb_to_lab_px(rgb2, lab2, color::LabMode::Simplified);
    double sq = 0;
    for (int c = 0; c < 3; ++c) sq += (lab1[c] - lab2[c]) * (lab1[c] - lab2[c]);
    CHECK(loss_j(p1, p2, Space::Lab).value == doctest::Approx(sq / 3.0).epsilon(1e-5));
}

TEST_CASE("loss_a_weighted: zero cases and the linear-domain equivalence") {
    SplitMix64 rng(4);
    haze::LightMap est = random_light_map(rng, 6, 6);
    haze::LightMap gt = random_light_map(rng, 6, 6);

    haze::TransmissionMap t(6, 6);
    for (auto& v : t.data) v = rng.uniform_f(0.05f, 0.95f);

    CHECK(loss_a_weighted(est, est, t, Space::Linear).value == 0.0);

    haze::TransmissionMap ones(6, 6, 1.f);
    CHECK(loss_a_weighted(est, gt, ones, Space::Linear).value == 0.0);

    // Equivalence: generating both dehazed images from the same I and t turns
    // the image loss into the weighted light-map loss, exactly, in the linear
    // domain. Verified in double.
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 8;
        std::vector<double> I(n * n * 3), tt(n * n), Ae(n * n * 3), Ag(n * n * 3);
        for (auto& v : I) v = rng.uniform(0.0, 1.5);
        for (auto& v : tt) v = rng.uniform(0.05, 0.95);
        for (auto& v : Ae) v = rng.uniform(0.24, 1.8);
        for (auto& v : Ag) v = rng.uniform(0.24, 1.8);
        std::vector<double> Je(n * n * 3), Jg(n * n * 3);
        for (int p = 0; p < n * n; ++p)
            for (int c = 0; c < 3; ++c) {
                double w = (tt[size_t(p)] - 1.0) / tt[size_t(p)];
                Je[size_t(p) * 3 + c] = w * Ae[size_t(p) * 3 + c] + I[size_t(p) * 3 + c] / tt[size_t(p)];
                Jg[size_t(p) * 3 + c] = w * Ag[size_t(p) * 3 + c] + I[size_t(p) * 3 + c] / tt[size_t(p)];
            }
        double lj = detail::mse_buf<double>(Je.data(), Jg.data(), Je.size());
        double la = detail::loss_a_weighted_linear_buf<double>(Ae.data(), Ag.data(), tt.data(),
                                                               size_t(n * n));
        CHECK(std::fabs(lj - la) / la < 1e-9);
    }
}

TEST_CASE("fwb_loss: zero set, gradient, and weight-drop zero-set preservation") {
    SplitMix64 rng(5);
    haze::LightMap est = random_light_map(rng, 4, 4);
    haze::LightMap gt = random_light_map(rng, 4, 4);

    CHECK(fwb_loss(est, est).value == 0.0);
    CHECK(fwb_loss(est, gt).value > 0.0);  // Lab chain is injective

    // Analytic gradient vs central finite differences (64-bit, h = 1e-4).
    for (int trial = 0; trial < 5; ++trial) {
        haze::LightMap e = random_light_map(rng, 4, 4);
        haze::LightMap g = random_light_map(rng, 4, 4);
        FwbLossGrad res = fwb_loss_with_grad(e, g);
        std::vector<double> ed(e.data.begin(), e.data.end());
        std::vector<double> gd(g.data.begin(), g.data.end());
        const double h = 1e-4;
        for (int probe = 0; probe < 24; ++probe) {
            size_t i = rng.next_below(ed.size());
            double saved = ed[i];
            ed[i] = saved + h;
            double lp = detail::fwb_loss_buf<double>(ed.data(), gd.data(), ed.size() / 3, 0.0,
                                                     nullptr, nullptr);
            ed[i] = saved - h;
            double lm = detail::fwb_loss_buf<double>(ed.data(), gd.data(), ed.size() / 3, 0.0,
                                                     nullptr, nullptr);
            ed[i] = saved;
            double fd = (lp - lm) / (2 * h);
            double analytic = res.grad.data[i];
            double rel = std::fabs(analytic - fd) / std::max({std::fabs(analytic), std::fabs(fd), 1e-8});
            CHECK(rel < 1e-4);
        }
    }

    // Dropping the (1-1/t)^2 weight preserves the zero set for t < 1.
    haze::TransmissionMap t(4, 4);
    for (auto& v : t.data) v = rng.uniform_f(0.1f, 0.99f);
    CHECK(loss_a_weighted(est, est, t, Space::Linear).value == 0.0);
    CHECK(fwb_loss(est, est).value == 0.0);
    CHECK(loss_a_weighted(est, gt, t, Space::Linear).value > 0.0);
    CHECK(fwb_loss(est, gt).value > 0.0);

    // Strict mode rejects nonpositive channels; the guarded mode floors and
    // counts them instead.
    haze::LightMap bad = est;
    bad.data[0] = -0.5f;
    CHECK_THROWS_AS(fwb_loss_with_grad(bad, gt), Error);
    FwbLossGrad guarded = fwb_loss_with_grad(bad, gt, 1e-3);
    CHECK(guarded.floored == 1);
    CHECK(guarded.grad.data[0] == 0.f);  // clamped channels get zero gradient
}
