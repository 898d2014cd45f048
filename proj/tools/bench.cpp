// Times the OpenMP kernels against their serial reference implementations and
// checks the outputs agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "hazelab/dcp.hpp"
#include "hazelab/image.hpp"
#include "hazelab/nn/kernels.hpp"
#include "hazelab/nn/reference.hpp"
#include "hazelab/parallel.hpp"
#include "hazelab/rng.hpp"

using namespace hazelab;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool bit_equal(const std::vector<float>& a, const std::vector<float>& b) {
    return a == b;
}

void report(const char* name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-28s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                match ? "outputs identical" : "OUTPUT MISMATCH");
}

}  // namespace

int main() {
    std::printf("threads: %d\n", max_threads());
    SplitMix64 rng(42);

    {
        // conv2d forward, 3x3 same padding
        const int n = 4, ic = 16, oc = 16, h = 96, w = 96;
        nn::kernels::ConvAttrs attrs{3, 1, 1, 1};
        std::vector<float> in(size_t(n) * ic * h * w), wt(size_t(oc) * ic * 9), bias(oc);
        for (auto& v : in) v = rng.uniform_f(-1.f, 1.f);
        for (auto& v : wt) v = rng.uniform_f(-0.2f, 0.2f);
        for (auto& v : bias) v = rng.uniform_f(-0.1f, 0.1f);
        std::vector<float> out_p(in.size() / ic * oc), out_s(out_p.size());
        double tp = time_ms(
            [&] {
                nn::kernels::conv2d_forward(in.data(), n, ic, h, w, wt.data(), bias.data(), oc,
                                            attrs, out_p.data(), h, w);
            },
            3);
        double ts = time_ms(
            [&] {
                ref::conv2d_forward(in.data(), n, ic, h, w, wt.data(), bias.data(), oc, attrs,
                                    out_s.data(), h, w);
            },
            3);
        report("conv2d 3x3 (4,16,96,96)", ts, tp, bit_equal(out_p, out_s));

        std::vector<float> din_p(in.size(), 0.f), din_s(in.size(), 0.f);
        double bp = time_ms(
            [&] {
                std::fill(din_p.begin(), din_p.end(), 0.f);
                nn::kernels::conv2d_backward_input(out_p.data(), n, oc, h, w, wt.data(), ic,
                                                   attrs, din_p.data(), h, w);
            },
            3);
        double bs = time_ms(
            [&] {
                std::fill(din_s.begin(), din_s.end(), 0.f);
                ref::conv2d_backward_input(out_p.data(), n, oc, h, w, wt.data(), ic, attrs,
                                           din_s.data(), h, w);
            },
            3);
        report("conv2d bwd-input", bs, bp, bit_equal(din_p, din_s));
    }

    {
        // dark channel, 15x15 window
        const int h = 512, w = 512;
        Image img(h, w);
        for (auto& v : img.data) v = rng.uniform_f(0.f, 1.f);
        ScalarField out_p, out_s;
        double tp = time_ms([&] { out_p = dcp::dark_channel(img, 15); }, 3);
        double ts = time_ms([&] { out_s = ref::dark_channel(img, 15); }, 3);
        report("dark_channel 15 (512x512)", ts, tp, bit_equal(out_p.data, out_s.data));
    }

    {
        // full colorspace conversion chain
        const int h = 1024, w = 1024;
        Image img(h, w);
        for (auto& v : img.data) v = rng.uniform_f(0.f, 1.f);
        color::LabImage lab_p, lab_s;
        double tp = time_ms([&] { lab_p = color::rgb_to_lab(img, color::LabMode::Exact); }, 3);
        double ts = time_ms([&] { lab_s = ref::rgb_to_lab(img, color::LabMode::Exact); }, 3);
        report("rgb_to_lab (1024x1024)", ts, tp, bit_equal(lab_p.data, lab_s.data));
    }

    return 0;
}
