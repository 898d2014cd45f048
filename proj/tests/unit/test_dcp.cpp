#include "doctest.h"

#include <cmath>

#include "hazelab/colorspace.hpp"
#include "hazelab/dcp.hpp"
#include "hazelab/metrics.hpp"
#include "hazelab/nn/reference.hpp"
#include "hazelab/rng.hpp"

#include "test_util.hpp"

using namespace hazelab;

TEST_CASE("dark_channel matches the brute-force reference") {
    SplitMix64 rng(12);
    for (int patch : {3, 7, 15}) {
        Image img = testutil::random_image(rng, 21, 17);
        ScalarField fast = dcp::dark_channel(img, patch);
        ScalarField slow = ref::dark_channel(img, patch);
        CHECK(fast.data == slow.data);
    }
}

TEST_CASE("dark_channel basics") {
    Image constant(9, 9, 0.4f);
    ScalarField d = dcp::dark_channel(constant, 5);
    for (float v : d.data) CHECK(v == 0.4f);

    SplitMix64 rng(13);
    Image img = testutil::random_image(rng, 12, 12, 0.1f, 1.f);
    ScalarField dark = dcp::dark_channel(img, 3);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x) {
            float cmin = std::min({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)});
            CHECK(dark.at(y, x) <= cmin);
        }

    // One zero pixel zeroes exactly its patch neighborhood.
    Image z = testutil::random_image(rng, 11, 11, 0.5f, 1.f);
    z.at(5, 5, 1) = 0.f;
    ScalarField dz = dcp::dark_channel(z, 5);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
            bool in_patch = std::abs(y - 5) <= 2 && std::abs(x - 5) <= 2;
            if (in_patch)
                CHECK(dz.at(y, x) == 0.f);
            else
                CHECK(dz.at(y, x) > 0.f);
        }

    CHECK_THROWS_AS(dcp::dark_channel(img, 4), Error);
    CHECK_THROWS_AS(dcp::dark_channel(img, 1), Error);
}

TEST_CASE("dark_channel properties: patch monotonicity and scaling") {
    SplitMix64 rng(14);
    Image img = testutil::random_image(rng, 16, 16, 0.05f, 1.f);
    ScalarField d3 = dcp::dark_channel(img, 3);
    ScalarField d7 = dcp::dark_channel(img, 7);
    ScalarField d11 = dcp::dark_channel(img, 11);
    for (size_t i = 0; i < d3.data.size(); ++i) {
        CHECK(d7.data[i] <= d3.data[i]);
        CHECK(d11.data[i] <= d7.data[i]);
    }

    Image scaled = img;
    for (auto& v : scaled.data) v *= 0.5f;
    ScalarField ds = dcp::dark_channel(scaled, 7);
    for (size_t i = 0; i < ds.data.size(); ++i)
        CHECK(ds.data[i] == doctest::Approx(0.5f * d7.data[i]).epsilon(1e-6));
}

TEST_CASE("estimate_airlight_scalar picks the brightest candidate deterministically") {
    dcp::DcpParams params;
    params.patch = 3;
    params.airlight_fraction = 0.05f;

    Image constant(8, 8, 0.6f);
    haze::Rgb a = dcp::estimate_airlight_scalar(constant, params);
    CHECK(a.r == 0.6f);
    CHECK(a.g == 0.6f);
    CHECK(a.b == 0.6f);

    // A bright white patch with the highest dark channel wins.
    SplitMix64 rng(15);
    Image img = testutil::random_image(rng, 16, 16, 0.05f, 0.5f);
    for (int y = 2; y <= 6; ++y)
        for (int x = 2; x <= 6; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = 1.f;
    haze::Rgb w = dcp::estimate_airlight_scalar(img, params);
    CHECK(w.r == 1.f);
    CHECK(w.g == 1.f);
    CHECK(w.b == 1.f);

    // Exact channel-sum ties resolve to the smallest row-major index. Two
    // 3x3 patches whose centers have equal dark channel and equal sums but
    // different colors; the earlier center must win.
    Image tie(8, 8, 0.1f);
    for (int y = 0; y <= 2; ++y)
        for (int x = 0; x <= 2; ++x) {
            tie.at(y, x, 0) = 0.9f;
            tie.at(y, x, 1) = 0.6f;
            tie.at(y, x, 2) = 0.6f;
            tie.at(y, x + 5, 0) = 0.6f;
            tie.at(y, x + 5, 1) = 0.9f;
            tie.at(y, x + 5, 2) = 0.6f;
        }
    haze::Rgb t = dcp::estimate_airlight_scalar(tie, {3, 0.95f, 0.1f, 0.05f});
    CHECK(t.r == 0.9f);  // patch centered at (1,1) precedes the one at (1,6)
    CHECK(t.g == 0.6f);
}

TEST_CASE("dcp_transmission clamps into [t0, 1]") {
    dcp::DcpParams params;  // omega 0.95, t0 0.1
    Image bright(16, 16, 0.7f);
    haze::TransmissionMap t = dcp::dcp_transmission(bright, {0.7f, 0.7f, 0.7f}, params);
    // I == A: dark channel of ones -> 1 - omega = 0.05, clamped up to 0.1.
    for (float v : t.data) CHECK(v == doctest::Approx(0.1f).epsilon(1e-6));

    Image black(16, 16, 0.f);
    haze::TransmissionMap t1 = dcp::dcp_transmission(black, {0.7f, 0.7f, 0.7f}, params);
    for (float v : t1.data) CHECK(v == 1.f);

    SplitMix64 rng(16);
    Image img = testutil::random_image(rng, 16, 16, 0.f, 1.3f);
    haze::TransmissionMap tr = dcp::dcp_transmission(img, {1.0f, 0.9f, 1.1f}, params);
    for (float v : tr.data) {
        CHECK(v >= 0.1f);
        CHECK(v <= 1.f);
    }

    CHECK_THROWS_AS(dcp::dcp_transmission(img, {0.f, 1.f, 1.f}, params), Error);
}

TEST_CASE("dcp_dehaze improves PSNR on a hazy synthetic scene and is deterministic") {
    Image clean;
    ScalarField depth;
    testutil::demo_scene(21, 32, 32, clean, depth);
    haze::HazeParams hp;
    hp.perturbation = 0.f;
    haze::Scene scene = haze::synthesize_scene(clean, depth, hp, 77);

    Image hazy_clamped = scene.hazy;
    for (auto& v : hazy_clamped.data) v = std::clamp(v, 0.f, 1.f);

    dcp::DcpResult r1 = dcp::dcp_dehaze(hazy_clamped);
    dcp::DcpResult r2 = dcp::dcp_dehaze(hazy_clamped);
    CHECK(r1.j.data == r2.j.data);  // deterministic

    for (float v : r1.t.data) {
        CHECK(v >= 0.1f);
        CHECK(v <= 1.f);
    }

    Image j_clamped = r1.j;
    for (auto& v : j_clamped.data) v = std::clamp(v, 0.f, 1.f);
    CHECK(metrics::psnr(j_clamped, clean) > metrics::psnr(hazy_clamped, clean));
}

TEST_CASE("retrofit_dehaze equals the scalar inversion for constant maps and recovers truth") {
    SplitMix64 rng(17);
    Image clean = testutil::random_image(rng, 16, 16);
    haze::LightMap a(16, 16);
    for (auto& v : a.data) v = rng.uniform_f(0.4f, 1.6f);
    haze::TransmissionMap t(16, 16);
    for (auto& v : t.data) v = rng.uniform_f(0.1f, 0.95f);
    Image hazy = haze::synthesize(clean, t, a);

    // Ground-truth map and transmission recover the clean image.
    Image rec = dcp::retrofit_dehaze(hazy, t, a);
    for (size_t i = 0; i < rec.data.size(); ++i)
        CHECK(std::fabs(rec.data[i] - clean.data[i]) < 1e-5f);

    // Constant map reproduces dehaze_scalar exactly.
    haze::LightMap constant(16, 16, 0.8f);
    Image via_map = dcp::retrofit_dehaze(hazy, t, constant);
    Image via_scalar = haze::dehaze_scalar(hazy, t, {0.8f, 0.8f, 0.8f});
    CHECK(via_map.data == via_scalar.data);

    haze::LightMap wrong(8, 8, 1.f);
    CHECK_THROWS_AS(dcp::retrofit_dehaze(hazy, t, wrong), Error);
}

TEST_CASE("ground-truth light map retrofit beats the scalar estimate on color error") {
    // Small-scale version of the direction check: on non-homogeneous scenes
    // the pixel-wise map should lower the mean color difference.
    int wins = 0;
    const int scenes = 6;
    for (int s = 0; s < scenes; ++s) {
        Image clean;
        ScalarField depth;
        testutil::demo_scene(uint64_t(100 + s), 48, 48, clean, depth);
        haze::HazeParams hp;  // 20% per-pixel disturbance
        haze::Scene scene = haze::synthesize_scene(clean, depth, hp, uint64_t(500 + s));
        Image hazy = scene.hazy;
        for (auto& v : hazy.data) v = std::clamp(v, 0.f, 1.f);

        dcp::DcpParams params;
        haze::Rgb a_scalar = dcp::estimate_airlight_scalar(hazy, params);
        haze::TransmissionMap t = dcp::dcp_transmission(hazy, a_scalar, params);

        Image j_scalar = haze::dehaze_scalar(hazy, t, a_scalar);
        Image j_map = dcp::retrofit_dehaze(hazy, t, scene.a);
        for (auto& v : j_scalar.data) v = std::clamp(v, 0.f, 1.f);
        for (auto& v : j_map.data) v = std::clamp(v, 0.f, 1.f);

        auto lab_clean = color::rgb_to_lab(clean, color::LabMode::Exact);
        double c_scalar =
            metrics::ciede2000(color::rgb_to_lab(j_scalar, color::LabMode::Exact), lab_clean).mean;
        double c_map =
            metrics::ciede2000(color::rgb_to_lab(j_map, color::LabMode::Exact), lab_clean).mean;
        if (c_map < c_scalar) ++wins;
    }
    CHECK(wins >= scenes - 1);
}
