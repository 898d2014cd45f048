#include "hazelab/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "hazelab/error.hpp"
#include "hazelab/losses.hpp"
#include "hazelab/rng.hpp"

namespace hazelab::net {

namespace {

struct SceneTensors {
    std::vector<float> hazy;   // 3*H*W planar
    std::vector<float> a_gt;   // 3*H*W planar
    std::vector<float> t_gt;   // H*W
    std::vector<float> clean;  // 3*H*W planar
};

void interleaved_to_planar(const std::vector<float>& src, int h, int w, std::vector<float>& dst) {
    dst.resize(size_t(h) * w * 3);
    for (int c = 0; c < 3; ++c)
        for (size_t p = 0; p < size_t(h) * w; ++p)
            dst[size_t(c) * h * w + p] = src[p * 3 + size_t(c)];
}

// Epoch-shuffled sampling: global draw position g maps to a per-epoch
// permutation of the scene list, so every scene is visited once per epoch.
// Depends only on (seed, g), which keeps resumed runs on the same sequence.
size_t scene_for_draw(const SplitMix64& master, size_t n_scenes, uint64_t g) {
    uint64_t epoch = g / n_scenes;
    uint64_t pos = g % n_scenes;
    SplitMix64 rng = master.split(2000 + epoch);
    std::vector<uint32_t> perm(n_scenes);
    for (size_t i = 0; i < n_scenes; ++i) perm[i] = uint32_t(i);
    for (size_t i = n_scenes - 1; i > 0; --i)
        std::swap(perm[i], perm[size_t(rng.next_below(i + 1))]);
    return perm[pos];
}

}  // namespace

std::string config_digest(const FwbModuleConfig& fcfg, const EtmConfig& ecfg,
                          const TrainSchedule& sched) {
    nlohmann::json j;
    j["fwb"] = {fcfg.levels, fcfg.base_channels, fcfg.width_multiplier, fcfg.convs_per_level};
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& s : ecfg.conv_specs) specs.push_back({s.kernel, s.dilation});
    j["etm"] = {ecfg.minpool_kernels, specs, ecfg.fusion_channels, ecfg.t_min};
    j["sched"] = {sched.phase_a_steps, sched.phase_b_steps, sched.max_cycles,
                  sched.converge_rel_improvement, sched.batch_size, sched.lr_a,
                  sched.lr_a_etm, sched.lr_b, sched.seed};
    return j.dump();
}

TrainResult train(const std::string& dataset_dir, const FwbModuleConfig& fcfg,
                  const EtmConfig& ecfg, const TrainSchedule& sched, const TrainOptions& opts) {
    if (sched.batch_size < 1) fail(ErrorCode::Usage, "train: batch size must be >= 1");
    if (sched.phase_a_steps < 1 || sched.phase_b_steps < 1)
        fail(ErrorCode::Usage, "train: phase lengths must be >= 1");

    // Load the training split; all scenes must share dimensions for batching.
    std::vector<SceneTensors> scenes;
    int height = 0, width = 0;
    for (const std::string& id : haze::list_scene_ids(dataset_dir)) {
        haze::LoadedScene s = haze::load_scene_dir(dataset_dir + "/scenes/" + id);
        if (s.manifest.split != opts.split) continue;
        if (scenes.empty()) {
            height = s.hazy.height;
            width = s.hazy.width;
            if (height % 8 != 0 || width % 8 != 0)
                fail(ErrorCode::Data, "train: scene dims must be divisible by 8");
        } else if (s.hazy.height != height || s.hazy.width != width) {
            fail(ErrorCode::Data, "train: scene " + id + " has mismatched dimensions");
        }
        SceneTensors st;
        interleaved_to_planar(s.hazy.data, height, width, st.hazy);
        interleaved_to_planar(s.a.data, height, width, st.a_gt);
        interleaved_to_planar(s.clean.data, height, width, st.clean);
        st.t_gt = s.t.data;
        scenes.push_back(std::move(st));
    }
    if (scenes.empty())
        fail(ErrorCode::Data, "train: no scenes with split '" + opts.split + "' under " +
                                  dataset_dir);

    const int b = sched.batch_size;
    const size_t plane = size_t(height) * width;
    SplitMix64 master(sched.seed);

    nn::Graph fwb = build_fwb_module(fcfg, master.split(0).seed(), b, height, width);
    nn::Graph etm = build_etm(ecfg, master.split(1).seed(), b, height, width);
    nn::Graph refine = build_refine(0, b, height, width);
    apply_params(refine, identity_refine_params());

    const int64_t cycle_len = sched.phase_a_steps + sched.phase_b_steps;
    const int64_t total_steps = cycle_len * sched.max_cycles;
    int64_t start_step = 0;
    if (opts.resume) {
        std::string digest = config_digest(fcfg, ecfg, sched);
        if (opts.resume->config_digest != digest)
            fail(ErrorCode::Data, "train: resume refused, weight manifest does not match config");
        apply_params(fwb, opts.resume->fwb_params);
        apply_params(etm, opts.resume->etm_params);
        apply_params(refine, opts.resume->refine_params);
        start_step = opts.resume->steps;
    }

    std::ofstream log_out;
    if (!opts.log_path.empty()) {
        log_out.open(opts.log_path, start_step > 0 ? std::ios::app : std::ios::out);
        if (!log_out) fail(ErrorCode::Data, "train: cannot open metrics log " + opts.log_path);
    }

    TrainResult result;
    auto record = [&](int64_t step, char phase, const std::string& name, double value) {
        if (!std::isfinite(value))
            fail(ErrorCode::Numeric, "train: nonfinite " + name + " at step " +
                                         std::to_string(step));
        result.log.push_back({step, phase, name, value});
        if (log_out) {
            nlohmann::json j;
            j["step"] = step;
            j["phase"] = std::string(1, phase);
            j["loss_name"] = name;
            j["value"] = value;
            log_out << j.dump() << "\n";
        }
    };

    Tensor4 hazy_b(b, 3, height, width), a_gt_b(b, 3, height, width);
    Tensor4 t_gt_b(b, 1, height, width), clean_b(b, 3, height, width);

    // Per-cycle means for the convergence test.
    std::vector<double> cyc_fwb, cyc_mset, cyc_msej;
    double acc_fwb = 0, acc_mset = 0, acc_msej = 0;

    int64_t step = start_step;
    for (; step < total_steps; ++step) {
        int64_t cycle = step / cycle_len;
        bool phase_a = (step % cycle_len) < sched.phase_a_steps;

        for (int i = 0; i < b; ++i) {
            const SceneTensors& s =
                scenes[scene_for_draw(master, scenes.size(), uint64_t(step) * b + uint64_t(i))];
            std::copy(s.hazy.begin(), s.hazy.end(), hazy_b.data.begin() + size_t(i) * plane * 3);
            std::copy(s.a_gt.begin(), s.a_gt.end(), a_gt_b.data.begin() + size_t(i) * plane * 3);
            std::copy(s.t_gt.begin(), s.t_gt.end(), t_gt_b.data.begin() + size_t(i) * plane);
            std::copy(s.clean.begin(), s.clean.end(),
                      clean_b.data.begin() + size_t(i) * plane * 3);
        }

        if (phase_a) {
            // Light-map branch under the CIELAB loss.
            Tensor4 a_est = fwb.forward({{"image", hazy_b}});
            Tensor4 a_grad(b, 3, height, width);
            double loss_sum = 0;
            std::vector<float> est_il(plane * 3), gt_il(plane * 3), grad_il(plane * 3);
            for (int i = 0; i < b; ++i) {
                const float* est = a_est.data.data() + size_t(i) * plane * 3;
                const float* gt = a_gt_b.data.data() + size_t(i) * plane * 3;
                for (int c = 0; c < 3; ++c)
                    for (size_t p = 0; p < plane; ++p) {
                        est_il[p * 3 + size_t(c)] = est[size_t(c) * plane + p];
                        gt_il[p * 3 + size_t(c)] = gt[size_t(c) * plane + p];
                    }
                loss_sum += losses::detail::fwb_loss_buf<float>(
                    est_il.data(), gt_il.data(), plane, float(opts.fwb_domain_floor),
                    &result.fwb_floor_warnings, grad_il.data());
                float* dst = a_grad.data.data() + size_t(i) * plane * 3;
                for (int c = 0; c < 3; ++c)
                    for (size_t p = 0; p < plane; ++p)
                        dst[size_t(c) * plane + p] = grad_il[p * 3 + size_t(c)] / float(b);
            }
            double fwb_loss_val = loss_sum / b;
            record(step, 'A', "fwb_loss", fwb_loss_val);
            fwb.backward(a_grad);
            nn::sgd_step(fwb.params(), sched.lr_a);

            // Transmission branch under MSE, same mini-batch.
            Tensor4 t_est = etm.forward({{"image", hazy_b}});
            double mse_t = losses::mse(t_est, t_gt_b).value;
            record(step, 'A', "mse_t", mse_t);
            etm.backward(losses::mse_grad(t_est, t_gt_b));
            nn::sgd_step(etm.params(), sched.lr_a_etm);

            acc_fwb += fwb_loss_val;
            acc_mset += mse_t;
        } else {
            // End-to-end under MSE against the clean image.
            Tensor4 a_est = fwb.forward({{"image", hazy_b}});
            Tensor4 t_est = etm.forward({{"image", hazy_b}});
            Tensor4 j0 = physics_forward(hazy_b, t_est, a_est, ecfg.t_min);
            Tensor4 j = refine.forward({{"j0", j0}});
            double mse_j = losses::mse(j, clean_b).value;
            record(step, 'B', "mse_j", mse_j);

            Tensor4 dj = losses::mse_grad(j, clean_b);
            auto refine_in_grads = refine.backward(dj);
            PhysicsGrads pg = physics_backward(hazy_b, t_est, a_est, ecfg.t_min,
                                               refine_in_grads.at("j0"));
            fwb.backward(pg.da);
            etm.backward(pg.dt);
            nn::sgd_step(fwb.params(), sched.lr_b);
            nn::sgd_step(etm.params(), sched.lr_b);
            nn::sgd_step(refine.params(), sched.lr_b);

            acc_msej += mse_j;
        }

        if ((step + 1) % cycle_len == 0) {
            cyc_fwb.push_back(acc_fwb / sched.phase_a_steps);
            cyc_mset.push_back(acc_mset / sched.phase_a_steps);
            cyc_msej.push_back(acc_msej / sched.phase_b_steps);
            acc_fwb = acc_mset = acc_msej = 0;
            result.cycles_run = int(cycle) + 1;
            if (cyc_fwb.size() >= 2) {
                auto improved = [&](const std::vector<double>& v) {
                    double prev = v[v.size() - 2], cur = v.back();
                    return prev > 0 && (prev - cur) / prev >= sched.converge_rel_improvement;
                };
                if (!improved(cyc_fwb) && !improved(cyc_mset) && !improved(cyc_msej)) {
                    result.converged = true;
                    ++step;
                    break;
                }
            }
        }
    }

    result.weights.fwb_cfg = fcfg;
    result.weights.etm_cfg = ecfg;
    result.weights.fwb_params = extract_params(fwb);
    result.weights.etm_params = extract_params(etm);
    result.weights.refine_params = extract_params(refine);
    result.weights.seed = sched.seed;
    result.weights.steps = step;
    result.weights.converged = result.converged;
    result.weights.config_digest = config_digest(fcfg, ecfg, sched);
    return result;
}

}  // namespace hazelab::net
