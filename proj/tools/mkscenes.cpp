// Generates procedural clean/depth scene pairs in the dataset layout
// (scenes/<id>/clean.png + depth.fwbt) so the synth -> train -> dehaze -> eval
// pipeline can run without any external data.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hazelab/error.hpp"
#include "hazelab/fwbt.hpp"
#include "hazelab/image.hpp"
#include "hazelab/png_io.hpp"
#include "hazelab/rng.hpp"

using namespace hazelab;

namespace {

void make_scene(uint64_t seed, int h, int w, Image& clean, ScalarField& depth) {
    SplitMix64 rng(seed);
    clean = Image(h, w);
    depth = ScalarField(h, w);

    // Smooth color gradient background.
    float base[3], slope_x[3], slope_y[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = rng.uniform_f(0.1f, 0.4f);
        slope_x[c] = rng.uniform_f(-0.2f, 0.2f);
        slope_y[c] = rng.uniform_f(-0.2f, 0.2f);
    }
    // Depth spans keep beta*d below ~2.9 so the densest haze still has
    // t > 0.055, above the inversion floor.
    float depth_near = rng.uniform_f(0.3f, 0.8f);
    float depth_far = depth_near + rng.uniform_f(4.5f, 7.4f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float fy = float(y) / float(h - 1), fx = float(x) / float(w - 1);
            for (int c = 0; c < 3; ++c)
                clean.at(y, x, c) =
                    std::clamp(base[c] + slope_x[c] * fx + slope_y[c] * fy, 0.02f, 0.98f);
            depth.at(y, x) = depth_near + (depth_far - depth_near) * fy;
        }

    // A few colored rectangles at their own depths.
    int shapes = 1 + int(rng.next_below(2));
    for (int s = 0; s < shapes; ++s) {
        int rw = 4 + int(rng.next_below(uint64_t(w / 2)));
        int rh = 4 + int(rng.next_below(uint64_t(h / 2)));
        int x0 = int(rng.next_below(uint64_t(w - rw)));
        int y0 = int(rng.next_below(uint64_t(h - rh)));
        float col[3] = {rng.uniform_f(0.05f, 0.6f), rng.uniform_f(0.05f, 0.6f),
                        rng.uniform_f(0.05f, 0.6f)};
        float d = depth_near + rng.uniform_f(0.f, depth_far - depth_near);
        for (int y = y0; y < y0 + rh; ++y)
            for (int x = x0; x < x0 + rw; ++x) {
                for (int c = 0; c < 3; ++c) clean.at(y, x, c) = col[c];
                depth.at(y, x) = d;
            }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate procedural clean/depth scenes"};
    std::string out;
    int count = 8, height = 64, width = 64;
    uint64_t seed = 0;
    app.add_option("--out", out, "output dataset directory")->required();
    app.add_option("--count", count, "number of scenes");
    app.add_option("--height", height, "scene height");
    app.add_option("--width", width, "scene width");
    app.add_option("--seed", seed, "master seed");

    try {
        app.parse(argc, argv);
        SplitMix64 master(seed);
        for (int i = 0; i < count; ++i) {
            char id[16];
            std::snprintf(id, sizeof id, "%04d", i);
            std::string dir = out + "/scenes/" + id;
            std::filesystem::create_directories(dir);
            Image clean;
            ScalarField depth;
            make_scene(master.split(uint64_t(i)).seed(), height, width, clean, depth);
            io::save_image(clean, dir + "/clean.png");
            fwbt::write_field(dir + "/depth.fwbt", depth);
        }
        std::cout << "wrote " << count << " scenes under " << out << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return int(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
