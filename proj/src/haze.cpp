#include "hazelab/haze.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "hazelab/fwbt.hpp"
#include "hazelab/parallel.hpp"
#include "hazelab/png_io.hpp"

namespace fs = std::filesystem;

namespace hazelab::haze {

void validate_transmission(const TransmissionMap& t, const char* what) {
    if (t.height <= 0 || t.width <= 0 ||
        t.data.size() != size_t(t.height) * size_t(t.width))
        fail(ErrorCode::Data, std::string(what) + ": data length does not match dimensions");
    for (float v : t.data)
        if (!(v > 0.f && v <= 1.f))
            fail(ErrorCode::Numeric, std::string(what) + ": values must lie in (0, 1]");
}

void validate_light_map(const LightMap& a, const char* what) {
    if (a.height <= 0 || a.width <= 0 ||
        a.data.size() != size_t(a.height) * size_t(a.width) * 3)
        fail(ErrorCode::Data, std::string(what) + ": data length does not match dimensions");
    for (float v : a.data)
        if (!std::isfinite(v) || v <= 0.f)
            fail(ErrorCode::Numeric, std::string(what) + ": channel values must be finite and > 0");
}

void validate_params(const HazeParams& p) {
    if (!(p.beta > 0.f)) fail(ErrorCode::Usage, "haze params: beta must be > 0");
    if (!(p.base_light_min <= p.base_light_max))
        fail(ErrorCode::Usage, "haze params: base light range is inverted");
    if (!(p.perturbation >= 0.f && p.perturbation < 1.f))
        fail(ErrorCode::Usage, "haze params: perturbation must lie in [0, 1)");
}

TransmissionMap transmission_from_depth(const ScalarField& depth, float beta) {
    validate_field(depth, "depth");
    if (!(beta > 0.f)) fail(ErrorCode::Usage, "transmission_from_depth: beta must be > 0");
    for (float d : depth.data)
        if (d < 0.f) fail(ErrorCode::Numeric, "transmission_from_depth: negative depth");
    TransmissionMap t(depth.height, depth.width);
    parallel_for(depth.height, [&](int y) {
        for (int x = 0; x < depth.width; ++x)
            t.at(y, x) = std::exp(-beta * depth.at(y, x));
    });
    return t;
}

namespace {

void require_same_dims(int h, int w, int h2, int w2, const char* what) {
    if (h != h2 || w != w2) fail(ErrorCode::Data, std::string(what) + ": dimension mismatch");
}

}  // namespace

Image synthesize(const Image& j, const TransmissionMap& t, const LightMap& a) {
    require_same_dims(j.height, j.width, t.height, t.width, "synthesize");
    require_same_dims(j.height, j.width, a.height, a.width, "synthesize");
    Image out(j.height, j.width);
    parallel_for(j.height, [&](int y) {
        size_t p0 = size_t(y) * j.width;
        detail::synthesize_buf(j.data.data() + p0 * 3, t.data.data() + p0,
                               a.data.data() + p0 * 3, out.data.data() + p0 * 3,
                               size_t(j.width));
    });
    return out;
}

Image dehaze_scalar(const Image& i, const TransmissionMap& t, Rgb a, float t_floor,
                    long* clamped) {
    require_same_dims(i.height, i.width, t.height, t.width, "dehaze_scalar");
    if (!(a.r > 0.f && a.g > 0.f && a.b > 0.f))
        fail(ErrorCode::Numeric, "dehaze_scalar: atmospheric light must be > 0");
    LightMap am(i.height, i.width);
    parallel_for(i.height, [&](int y) {
        for (int x = 0; x < i.width; ++x) {
            am.at(y, x, 0) = a.r;
            am.at(y, x, 1) = a.g;
            am.at(y, x, 2) = a.b;
        }
    });
    return dehaze_map(i, t, am, t_floor, clamped);
}

Image dehaze_map(const Image& i, const TransmissionMap& t, const LightMap& a,
                 float t_floor, long* clamped) {
    require_same_dims(i.height, i.width, t.height, t.width, "dehaze_map");
    require_same_dims(i.height, i.width, a.height, a.width, "dehaze_map");
    if (!(t_floor > 0.f)) fail(ErrorCode::Usage, "dehaze_map: t_floor must be > 0");
    Image out(i.height, i.width);
    std::vector<long> clamped_rows(size_t(i.height), 0);
    parallel_for(i.height, [&](int y) {
        size_t p0 = size_t(y) * i.width;
        detail::dehaze_map_buf(i.data.data() + p0 * 3, t.data.data() + p0,
                               a.data.data() + p0 * 3, out.data.data() + p0 * 3,
                               size_t(i.width), t_floor, &clamped_rows[size_t(y)]);
    });
    if (clamped) {
        long total = 0;
        for (long v : clamped_rows) total += v;
        *clamped = total;
    }
    return out;
}

LightMap sample_light_map(uint64_t seed, int height, int width, const HazeParams& params) {
    validate_params(params);
    SplitMix64 rng(seed);
    float base = rng.uniform_f(params.base_light_min, params.base_light_max);
    float lo = 1.f - params.perturbation;
    float hi = 1.f + params.perturbation;
    LightMap a(height, width);
    for (size_t k = 0; k < a.data.size(); ++k)
        a.data[k] = base * rng.uniform_f(lo, hi);
    return a;
}

Scene synthesize_scene(const Image& clean, const ScalarField& depth,
                       const HazeParams& params, uint64_t seed) {
    validate_image(clean, "clean");
    require_same_dims(clean.height, clean.width, depth.height, depth.width,
                      "synthesize_scene");
    Scene s;
    s.t = transmission_from_depth(depth, params.beta);
    s.a = sample_light_map(seed, clean.height, clean.width, params);
    s.hazy = synthesize(clean, s.t, s.a);
    return s;
}

void write_scene_dir(const std::string& dir, const Image& clean, const ScalarField& depth,
                     const Scene& scene, const SceneManifest& manifest) {
    fs::create_directories(dir);
    io::save_image(clean, dir + "/clean.png");
    fwbt::write_field(dir + "/depth.fwbt", depth);
    fwbt::write(dir + "/hazy.fwbt",
                {uint32_t(scene.hazy.height), uint32_t(scene.hazy.width), 3},
                scene.hazy.data.data(), scene.hazy.data.size());
    io::save_image(scene.hazy, dir + "/hazy.png");
    fwbt::write(dir + "/t.fwbt", {uint32_t(scene.t.height), uint32_t(scene.t.width)},
                scene.t.data.data(), scene.t.data.size());
    fwbt::write(dir + "/A.fwbt",
                {uint32_t(scene.a.height), uint32_t(scene.a.width), 3},
                scene.a.data.data(), scene.a.data.size());

    nlohmann::json j;
    j["seed"] = manifest.seed;
    j["beta"] = manifest.params.beta;
    j["base_light_min"] = manifest.params.base_light_min;
    j["base_light_max"] = manifest.params.base_light_max;
    j["perturbation"] = manifest.params.perturbation;
    j["split"] = manifest.split;
    std::ofstream out(dir + "/manifest.json");
    if (!out) fail(ErrorCode::Data, "cannot write scene manifest: " + dir);
    out << j.dump(2) << "\n";
}

LoadedScene load_scene_dir(const std::string& dir) {
    LoadedScene s;
    s.id = fs::path(dir).filename().string();
    s.clean = io::load_image(dir + "/clean.png");
    Image hazy = fwbt::read_image(dir + "/hazy.fwbt");
    s.hazy = std::move(hazy);
    ScalarField tf = fwbt::read_field(dir + "/t.fwbt");
    s.t.height = tf.height;
    s.t.width = tf.width;
    s.t.data = std::move(tf.data);
    Image af = fwbt::read_image(dir + "/A.fwbt");
    s.a.height = af.height;
    s.a.width = af.width;
    s.a.data = std::move(af.data);

    std::ifstream in(dir + "/manifest.json");
    if (!in) fail(ErrorCode::Data, "missing scene manifest: " + dir);
    nlohmann::json j;
    in >> j;
    s.manifest.seed = j.value("seed", uint64_t(0));
    s.manifest.params.beta = j.value("beta", 0.35f);
    s.manifest.params.base_light_min = j.value("base_light_min", 0.3f);
    s.manifest.params.base_light_max = j.value("base_light_max", 1.5f);
    s.manifest.params.perturbation = j.value("perturbation", 0.2f);
    s.manifest.split = j.value("split", "train");
    return s;
}

std::vector<std::string> list_scene_ids(const std::string& dataset_dir) {
    fs::path scenes = fs::path(dataset_dir) / "scenes";
    if (!fs::is_directory(scenes))
        fail(ErrorCode::Data, "no scenes/ directory under " + dataset_dir);
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(scenes))
        if (e.is_directory()) ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace hazelab::haze
