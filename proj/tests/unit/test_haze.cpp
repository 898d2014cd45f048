#include "doctest.h"

#include <cmath>
#include <fstream>

#include "hazelab/haze.hpp"
#include "hazelab/rng.hpp"

#include "test_util.hpp"

using namespace hazelab;
using namespace hazelab::haze;

TEST_CASE("transmission_from_depth follows the exponential law") {
    ScalarField d(1, 3);
    d.data = {0.f, 2.f, 5.f};
    TransmissionMap t = transmission_from_depth(d, 0.35f);
    CHECK(t.data[0] == 1.0f);
    CHECK(t.data[1] == doctest::Approx(0.4965853037914095).epsilon(1e-6));
    CHECK(t.data[1] > t.data[2]);  // monotone in depth
    for (float v : t.data) CHECK(v > 0.f);

    TransmissionMap t2 = transmission_from_depth(d, 0.7f);
    CHECK(t2.data[1] < t.data[1]);  // monotone in beta

    ScalarField neg(1, 1);
    neg.data = {-1.f};
    CHECK_THROWS_AS(transmission_from_depth(neg, 0.35f), Error);
    CHECK_THROWS_AS(transmission_from_depth(d, -0.1f), Error);
}

TEST_CASE("synthesize blends radiance and light, unclipped") {
    Image j(2, 2, 0.8f);
    TransmissionMap t(2, 2, 0.5f);
    LightMap a(2, 2, 1.0f);
    Image i = synthesize(j, t, a);
    for (float v : i.data) CHECK(v == doctest::Approx(0.9f).epsilon(1e-7));

    TransmissionMap t1(2, 2, 1.f);
    Image same = synthesize(j, t1, a);
    CHECK(same.data == j.data);

    TransmissionMap t0(2, 2, 1e-6f);
    Image full = synthesize(j, t0, a);
    for (float v : full.data) CHECK(v == doctest::Approx(1.0f).epsilon(1e-5));

    // Output can exceed 1 when A > 1 and stays unclipped.
    LightMap big(2, 2, 1.8f);
    Image over = synthesize(j, t, big);
    for (float v : over.data) CHECK(v > 1.2f);

    LightMap wrong(3, 2, 1.f);
    CHECK_THROWS_AS(synthesize(j, t, wrong), Error);
}

TEST_CASE("synthesize is a convex combination per pixel") {
    SplitMix64 rng(31);
    Image j = testutil::random_image(rng, 8, 8);
    LightMap a(8, 8);
    for (auto& v : a.data) v = rng.uniform_f(0.24f, 1.8f);
    TransmissionMap t(8, 8);
    for (auto& v : t.data) v = rng.uniform_f(0.01f, 1.f);
    Image i = synthesize(j, t, a);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int c = 0; c < 3; ++c) {
                float lo = std::min(j.at(y, x, c), a.at(y, x, c));
                float hi = std::max(j.at(y, x, c), a.at(y, x, c));
                CHECK(i.at(y, x, c) >= lo - 1e-6f);
                CHECK(i.at(y, x, c) <= hi + 1e-6f);
            }
}

TEST_CASE("dehaze_scalar inverts the blend and floors t") {
    Image i(2, 2, 0.9f);
    TransmissionMap t(2, 2, 0.5f);
    Image j = dehaze_scalar(i, t, {1.f, 1.f, 1.f});
    for (float v : j.data) CHECK(v == doctest::Approx(0.8f).epsilon(1e-6));

    // I == A recovers A for any t.
    Image ia(2, 2, 0.7f);
    TransmissionMap tr(2, 2);
    SplitMix64 rng(5);
    for (auto& v : tr.data) v = rng.uniform_f(0.1f, 1.f);
    Image ja = dehaze_scalar(ia, tr, {0.7f, 0.7f, 0.7f});
    for (float v : ja.data) CHECK(v == doctest::Approx(0.7f).epsilon(1e-6));

    // Floor engages below 0.05 and is counted.
    TransmissionMap tlow(2, 2, 0.01f);
    long clamped = 0;
    dehaze_scalar(i, tlow, {1.f, 1.f, 1.f}, 0.05f, &clamped);
    CHECK(clamped == 4);
}

TEST_CASE("dehaze_map round-trips synthesize and degenerates to the scalar path") {
    SplitMix64 rng(41);
    Image j = testutil::random_image(rng, 12, 12);
    LightMap a(12, 12);
    for (auto& v : a.data) v = rng.uniform_f(0.24f, 1.8f);
    TransmissionMap t(12, 12);
    for (auto& v : t.data) v = rng.uniform_f(0.05f, 1.f);

    Image hazy = synthesize(j, t, a);
    Image rec = dehaze_map(hazy, t, a);
    for (size_t k = 0; k < j.data.size(); ++k)
        CHECK(std::fabs(rec.data[k] - j.data[k]) < 1e-5f);

    // Pointwise identity: I == A(x,y) gives J == A(x,y).
    Image ia(12, 12);
    for (size_t k = 0; k < ia.data.size(); ++k) ia.data[k] = a.data[k];
    Image jid = dehaze_map(ia, t, a);
    for (size_t k = 0; k < jid.data.size(); ++k)
        CHECK(jid.data[k] == doctest::Approx(a.data[k]).epsilon(1e-6));

    // A constant map reproduces the scalar inversion bit-for-bit.
    LightMap constant(12, 12);
    for (size_t p = 0; p < constant.data.size(); p += 3) {
        constant.data[p] = 0.9f;
        constant.data[p + 1] = 1.1f;
        constant.data[p + 2] = 0.7f;
    }
    Image via_map = dehaze_map(hazy, t, constant);
    Image via_scalar = dehaze_scalar(hazy, t, {0.9f, 1.1f, 0.7f});
    CHECK(via_map.data == via_scalar.data);
}

TEST_CASE("sample_light_map is deterministic and respects the range bounds") {
    HazeParams p;
    LightMap a1 = sample_light_map(99, 16, 16, p);
    LightMap a2 = sample_light_map(99, 16, 16, p);
    CHECK(a1.data == a2.data);
    LightMap a3 = sample_light_map(100, 16, 16, p);
    CHECK(a1.data != a3.data);

    for (float v : a1.data) {
        CHECK(v >= 0.3f * 0.8f);
        CHECK(v <= 1.5f * 1.2f);
    }

    HazeParams flat;
    flat.perturbation = 0.f;
    LightMap c = sample_light_map(7, 8, 8, flat);
    for (float v : c.data) CHECK(v == c.data[0]);
    CHECK(c.data[0] >= 0.3f);
    CHECK(c.data[0] <= 1.5f);
}

TEST_CASE("synthesize_scene round-trips and scene files reproduce byte-identically") {
    testutil::TempDir dir("scene");
    Image clean;
    ScalarField depth;
    testutil::demo_scene(4, 24, 24, clean, depth);

    HazeParams params;
    Scene s1 = synthesize_scene(clean, depth, params, 1234);
    Scene s2 = synthesize_scene(clean, depth, params, 1234);
    CHECK(s1.hazy.data == s2.hazy.data);
    CHECK(s1.a.data == s2.a.data);

    Image rec = dehaze_map(s1.hazy, s1.t, s1.a);
    for (size_t k = 0; k < clean.data.size(); ++k)
        CHECK(std::fabs(rec.data[k] - clean.data[k]) < 1e-5f);

    SceneManifest man;
    man.seed = 1234;
    man.params = params;
    man.split = "train";
    write_scene_dir(dir.file("s"), clean, depth, s1, man);
    LoadedScene back = load_scene_dir(dir.file("s"));
    CHECK(back.hazy.data == s1.hazy.data);
    CHECK(back.t.data == s1.t.data);
    CHECK(back.a.data == s1.a.data);
    CHECK(back.manifest.split == "train");
    CHECK(back.manifest.params.beta == doctest::Approx(0.35f));

    // Manifest records the synthesis parameters.
    std::ifstream in(dir.file("s") + "/manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.find("0.35") != std::string::npos);
    CHECK(text.find("seed") != std::string::npos);
}
