#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "hazelab/haze.hpp"
#include "hazelab/image.hpp"
#include "hazelab/rng.hpp"

namespace testutil {

// Fresh directory under the system temp root; removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("hazelab_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline hazelab::Image random_image(hazelab::SplitMix64& rng, int h, int w, float lo = 0.f,
                                   float hi = 1.f) {
    hazelab::Image img(h, w);
    for (auto& v : img.data) v = rng.uniform_f(lo, hi);
    return img;
}

inline hazelab::ScalarField ramp_depth(int h, int w, float near, float far) {
    hazelab::ScalarField d(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            d.at(y, x) = near + (far - near) * float(y) / float(h - 1);
    return d;
}

// Procedural clean/depth pair in the spirit of the demo-scene generator.
inline void demo_scene(uint64_t seed, int h, int w, hazelab::Image& clean,
                       hazelab::ScalarField& depth) {
    hazelab::SplitMix64 rng(seed);
    clean = hazelab::Image(h, w);
    float base[3], sx[3], sy[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = rng.uniform_f(0.1f, 0.4f);
        sx[c] = rng.uniform_f(-0.2f, 0.2f);
        sy[c] = rng.uniform_f(-0.2f, 0.2f);
    }
    float dn = rng.uniform_f(0.3f, 0.8f);
    float df = dn + rng.uniform_f(4.5f, 7.4f);
    depth = ramp_depth(h, w, dn, df);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                clean.at(y, x, c) = std::clamp(
                    base[c] + sx[c] * float(x) / w + sy[c] * float(y) / h, 0.02f, 0.98f);
    int shapes = 2 + int(rng.next_below(3));
    for (int s = 0; s < shapes; ++s) {
        int rw = 4 + int(rng.next_below(uint64_t(w / 2)));
        int rh = 4 + int(rng.next_below(uint64_t(h / 2)));
        int x0 = int(rng.next_below(uint64_t(w - rw)));
        int y0 = int(rng.next_below(uint64_t(h - rh)));
        float col[3] = {rng.uniform_f(0.05f, 0.6f), rng.uniform_f(0.05f, 0.6f),
                        rng.uniform_f(0.05f, 0.6f)};
        float d = rng.uniform_f(dn, df);
        for (int y = y0; y < y0 + rh; ++y)
            for (int x = x0; x < x0 + rw; ++x) {
                for (int c = 0; c < 3; ++c) clean.at(y, x, c) = col[c];
                depth.at(y, x) = d;
            }
    }
}

// Runs a shell command; returns the exit code and captures stdout+stderr.
inline int run_cmd(const std::string& cmd, std::string* output = nullptr) {
    std::string full = cmd + " 2>&1";
    FILE* pipe = ::popen(full.c_str(), "r");
    if (!pipe) return -1;
    char buf[4096];
    std::string out;
    while (size_t n = ::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int status = ::pclose(pipe);
    if (output) *output = out;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace testutil
