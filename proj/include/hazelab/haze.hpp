#pragma once

// Haze synthesis and inversion. The forward model blends scene radiance with
// an atmospheric light term in proportion to 1-t, where the transmission
// t = exp(-beta * depth). The light term is either a scalar per image or a
// per-pixel map; inversion recovers the radiance by the algebraic inverse of
// that blend. All inversion paths share one per-pixel formula so that a
// constant light map reproduces the scalar path bit-for-bit.

#include <cstdint>
#include <string>
#include <vector>

#include "hazelab/error.hpp"
#include "hazelab/image.hpp"
#include "hazelab/rng.hpp"

namespace hazelab::haze {

// H x W transmission field, every value in (0, 1].
struct TransmissionMap {
    int height = 0;
    int width = 0;
    std::vector<float> data;

    TransmissionMap() = default;
    TransmissionMap(int h, int w, float fill = 1.f)
        : height(h), width(w), data(size_t(h) * w, fill) {}
    float at(int y, int x) const { return data[size_t(y) * width + x]; }
    float& at(int y, int x) { return data[size_t(y) * width + x]; }
};

// H x W x 3 atmospheric light map, every channel value > 0.
struct LightMap {
    int height = 0;
    int width = 0;
    std::vector<float> data;

    LightMap() = default;
    LightMap(int h, int w, float fill = 1.f)
        : height(h), width(w), data(size_t(h) * w * 3, fill) {}
    float at(int y, int x, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
    float& at(int y, int x, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
};

struct Rgb {
    float r = 0.f, g = 0.f, b = 0.f;
};

struct HazeParams {
    float beta = 0.35f;             // extinction coefficient per depth unit
    float base_light_min = 0.3f;    // base atmospheric light factor range
    float base_light_max = 1.5f;
    float perturbation = 0.2f;      // per-pixel, per-channel disturbance, in [0,1)
};

void validate_transmission(const TransmissionMap& t, const char* what = "transmission");
void validate_light_map(const LightMap& a, const char* what = "light map");
void validate_params(const HazeParams& p);

// Default floor applied before any division by t in the inversion ops. The
// classical dark-channel pipeline uses its own, separate 0.1 floor.
inline constexpr float kTransmissionFloor = 0.05f;

namespace detail {

// Shared per-pixel inverse of the blend: J = (I - A)/t + A. Both map and
// scalar inversion funnel through this so constant maps match bit-for-bit.
template <typename T>
inline T invert_px(T i, T t, T a) {
    return (i - a) / t + a;
}

template <typename T>
void synthesize_buf(const T* j, const T* t, const T* a, T* out, size_t pixels) {
    for (size_t p = 0; p < pixels; ++p) {
        T tv = t[p];
        for (int c = 0; c < 3; ++c)
            out[p * 3 + c] = j[p * 3 + c] * tv + a[p * 3 + c] * (T(1) - tv);
    }
}

template <typename T>
void dehaze_map_buf(const T* i, const T* t, const T* a, T* out, size_t pixels,
                    T t_floor, long* clamped) {
    long n_clamped = 0;
    for (size_t p = 0; p < pixels; ++p) {
        T tv = t[p];
        if (tv < t_floor) {
            tv = t_floor;
            ++n_clamped;
        }
        for (int c = 0; c < 3; ++c)
            out[p * 3 + c] = invert_px(i[p * 3 + c], tv, a[p * 3 + c]);
    }
    if (clamped) *clamped = n_clamped;
}

}  // namespace detail

// t = exp(-beta * d) elementwise; negative depth is a domain error.
TransmissionMap transmission_from_depth(const ScalarField& depth, float beta);

// I = J*t + A*(1-t), per pixel and channel. Output may exceed 1 and is not
// clipped.
Image synthesize(const Image& j, const TransmissionMap& t, const LightMap& a);

// J = (I - A)/t + A with a constant A per channel; t is floored at t_floor
// and the number of floored pixels is reported through `clamped` if given.
Image dehaze_scalar(const Image& i, const TransmissionMap& t, Rgb a,
                    float t_floor = kTransmissionFloor, long* clamped = nullptr);

// Same inversion with a per-pixel light map.
Image dehaze_map(const Image& i, const TransmissionMap& t, const LightMap& a,
                 float t_floor = kTransmissionFloor, long* clamped = nullptr);

// One base light value per image, shared by the three channels, multiplied by
// independent per-pixel per-channel factors in [1-p, 1+p]. Deterministic for
// a fixed seed; draw order is row-major pixels, channels R,G,B.
LightMap sample_light_map(uint64_t seed, int height, int width, const HazeParams& params);

struct Scene {
    Image hazy;
    TransmissionMap t;
    LightMap a;
};

Scene synthesize_scene(const Image& clean, const ScalarField& depth,
                       const HazeParams& params, uint64_t seed);

// Dataset layout: <dir>/clean.png, depth.fwbt (rank-2), hazy.fwbt (unclipped),
// hazy.png (clipped preview), t.fwbt, A.fwbt, manifest.json.
struct SceneManifest {
    uint64_t seed = 0;
    HazeParams params;
    std::string split = "train";
};

void write_scene_dir(const std::string& dir, const Image& clean, const ScalarField& depth,
                     const Scene& scene, const SceneManifest& manifest);

struct LoadedScene {
    std::string id;
    Image clean;
    Image hazy;           // from hazy.fwbt (unclipped)
    TransmissionMap t;
    LightMap a;
    SceneManifest manifest;
};

LoadedScene load_scene_dir(const std::string& dir);

// Scene subdirectory names under <dataset>/scenes, sorted.
std::vector<std::string> list_scene_ids(const std::string& dataset_dir);

}  // namespace hazelab::haze
