// hazelab command-line tool: haze synthesis, dehazing (classical and
// learned), training, light-map retrofit, metric evaluation and colorspace
// debugging over the scene dataset layout.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "hazelab/dcp.hpp"
#include "hazelab/error.hpp"
#include "hazelab/fwbt.hpp"
#include "hazelab/haze.hpp"
#include "hazelab/losses.hpp"
#include "hazelab/metrics.hpp"
#include "hazelab/net/train.hpp"
#include "hazelab/parallel.hpp"
#include "hazelab/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hazelab;

namespace {

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Data, "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::Data, "malformed config file " + path + ": " + e.what());
    }
    return j;
}

// Precedence: CLI flag > config file > built-in default. `value` already holds
// flag-or-default; the config only wins when the flag was not passed.
template <typename T>
void resolve(const CLI::App* cmd, const std::string& flag, const json& cfg,
             const std::string& key, T& value) {
    if (cmd->count(flag) == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Data, "cannot write " + path);
    out << j.dump(2) << "\n";
}

json metric_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Image load_any_image(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".fwbt")
        return fwbt::read_image(path);
    return io::load_image(path);
}

std::vector<double> parse_triple(const std::string& s, const char* what) {
    std::vector<double> vals;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            vals.push_back(std::stod(tok));
        } catch (...) {
            fail(ErrorCode::Usage, std::string(what) + ": expected three comma-separated numbers");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (vals.size() != 3)
        fail(ErrorCode::Usage, std::string(what) + ": expected three comma-separated numbers");
    return vals;
}

// ---------------------------------------------------------------------------

int cmd_synth(const CLI::App* cmd, const std::string& clean_dir, const std::string& out_dir,
              float beta, float a_min, float a_max, float perturb, uint64_t seed,
              double split_fraction, const std::string& config_path) {
    json cfg = load_config(config_path);
    resolve(cmd, "--beta", cfg, "beta", beta);
    resolve(cmd, "--a-min", cfg, "a_min", a_min);
    resolve(cmd, "--a-max", cfg, "a_max", a_max);
    resolve(cmd, "--perturb", cfg, "perturb", perturb);
    resolve(cmd, "--seed", cfg, "seed", seed);
    resolve(cmd, "--split", cfg, "split", split_fraction);

    haze::HazeParams params{beta, a_min, a_max, perturb};
    haze::validate_params(params);
    if (!(split_fraction >= 0.0 && split_fraction <= 1.0))
        fail(ErrorCode::Usage, "synth: --split must lie in [0, 1]");

    std::vector<std::string> ids = haze::list_scene_ids(clean_dir);
    if (ids.empty()) fail(ErrorCode::Data, "synth: no scenes under " + clean_dir);
    size_t n_train = size_t(std::lround(split_fraction * double(ids.size())));

    SplitMix64 master(seed);
    std::vector<std::string> errors(ids.size());
    parallel_for(int(ids.size()), [&](int i) {
        try {
            std::string in_dir = clean_dir + "/scenes/" + ids[size_t(i)];
            if (!fs::exists(in_dir + "/depth.fwbt")) {
                errors[size_t(i)] = "missing depth.fwbt for scene " + ids[size_t(i)];
                return;
            }
            Image clean = io::load_image(in_dir + "/clean.png");
            ScalarField depth = fwbt::read_field(in_dir + "/depth.fwbt");
            SplitMix64 stream = master.split(uint64_t(i));
            haze::Scene scene = haze::synthesize_scene(clean, depth, params, stream.seed());
            haze::SceneManifest man;
            man.seed = stream.seed();
            man.params = params;
            man.split = size_t(i) < n_train ? "train" : "test";
            haze::write_scene_dir(out_dir + "/scenes/" + ids[size_t(i)], clean, depth, scene, man);
        } catch (const std::exception& e) {
            errors[size_t(i)] = std::string("scene ") + ids[size_t(i)] + ": " + e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) fail(ErrorCode::Data, "synth: " + e);

    json man;
    man["command"] = "synth";
    man["clean_dir"] = clean_dir;
    man["beta"] = beta;
    man["a_min"] = a_min;
    man["a_max"] = a_max;
    man["perturb"] = perturb;
    man["seed"] = seed;
    man["split_fraction"] = split_fraction;
    json scenes = json::array();
    for (size_t i = 0; i < ids.size(); ++i)
        scenes.push_back({{"id", ids[i]}, {"split", i < n_train ? "train" : "test"}});
    man["scenes"] = scenes;
    fs::create_directories(out_dir);
    write_json(out_dir + "/manifest.json", man);
    std::cout << "synthesized " << ids.size() << " scenes (" << n_train << " train, "
              << ids.size() - n_train << " test) into " << out_dir << "\n";
    return 0;
}

int cmd_dehaze(const std::string& method, const std::string& weights_dir,
               const std::string& in_path, const std::string& out_path,
               const std::string& dump_t, const std::string& dump_a) {
    Image hazy = load_any_image(in_path);
    json man;
    man["command"] = "dehaze";
    man["method"] = method;
    man["input"] = in_path;

    if (method == "dcp") {
        dcp::DcpResult res = dcp::dcp_dehaze(hazy);
        io::save_image(res.j, out_path);
        if (!dump_t.empty()) {
            ScalarField tf(res.t.height, res.t.width);
            tf.data = res.t.data;
            fwbt::write_field(dump_t, tf);
        }
        if (!dump_a.empty()) {
            Image a1(1, 1);
            a1.data = {res.a.r, res.a.g, res.a.b};
            fwbt::write_image(dump_a, a1);
        }
        man["airlight"] = {res.a.r, res.a.g, res.a.b};
    } else if (method == "fwbnet") {
        if (weights_dir.empty())
            fail(ErrorCode::Usage, "dehaze: --weights is required for method fwbnet");
        net::NetWeights w = net::load_weights(weights_dir);
        int oh = hazy.height, ow = hazy.width;
        Image padded = net::pad_reflect_to_multiple(hazy, 8);
        man["padded"] = (padded.height != oh || padded.width != ow);
        man["input_size"] = {oh, ow};
        net::DehazeOutput out = net::forward_dehaze(w, padded);

        Image j(oh, ow);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                for (int c = 0; c < 3; ++c) j.at(y, x, c) = out.j.at(y, x, c);
        io::save_image(j, out_path);
        if (!dump_t.empty()) {
            ScalarField tf(oh, ow);
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x) tf.at(y, x) = out.t.at(y, x);
            fwbt::write_field(dump_t, tf);
        }
        if (!dump_a.empty()) {
            fwbt::write(dump_a, {uint32_t(oh), uint32_t(ow), 3}, out.a.data.data(),
                        out.a.data.size());
            // Light maps from the net share the image layout; crop if padded.
            if (padded.height != oh || padded.width != ow) {
                std::vector<float> crop(size_t(oh) * ow * 3);
                for (int y = 0; y < oh; ++y)
                    for (int x = 0; x < ow; ++x)
                        for (int c = 0; c < 3; ++c)
                            crop[(size_t(y) * ow + x) * 3 + size_t(c)] = out.a.at(y, x, c);
                fwbt::write(dump_a, {uint32_t(oh), uint32_t(ow), 3}, crop.data(), crop.size());
            }
        }
        man["weights"] = weights_dir;
    } else {
        fail(ErrorCode::Usage, "dehaze: unknown method " + method);
    }
    man["output"] = out_path;
    write_json(out_path + ".manifest.json", man);
    return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& report_path) {
    std::set<std::string> pred_names, gt_names;
    for (const auto& e : fs::directory_iterator(pred_dir))
        if (e.path().extension() == ".png") pred_names.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.path().extension() == ".png") gt_names.insert(e.path().filename().string());

    std::vector<std::string> matched, pred_only, gt_only;
    for (const auto& n : pred_names)
        (gt_names.count(n) ? matched : pred_only).push_back(n);
    for (const auto& n : gt_names)
        if (!pred_names.count(n)) gt_only.push_back(n);

    json rows = json::array();
    double sum_p = 0, sum_s = 0, sum_c = 0;
    for (const auto& name : matched) {
        Image pred = io::load_image(pred_dir + "/" + name);
        Image gt = io::load_image(gt_dir + "/" + name);
        double p = metrics::psnr(pred, gt);
        double s = metrics::ssim(pred, gt);
        auto lab_p = color::rgb_to_lab(pred, color::LabMode::Exact);
        auto lab_g = color::rgb_to_lab(gt, color::LabMode::Exact);
        double c = metrics::ciede2000(lab_p, lab_g).mean;
        rows.push_back({{"name", name},
                        {"psnr", metric_value(p)},
                        {"ssim", s},
                        {"ciede2000", c}});
        sum_p += p;
        sum_s += s;
        sum_c += c;
    }

    json rep;
    rep["command"] = "eval";
    rep["pred_dir"] = pred_dir;
    rep["gt_dir"] = gt_dir;
    rep["pairs"] = rows;
    if (!matched.empty())
        rep["mean"] = {{"psnr", metric_value(sum_p / double(matched.size()))},
                       {"ssim", sum_s / double(matched.size())},
                       {"ciede2000", sum_c / double(matched.size())}};
    rep["unmatched"] = {{"pred_only", pred_only}, {"gt_only", gt_only}};
    write_json(report_path, rep);
    std::cout << rep.dump(2) << "\n";
    if (!pred_only.empty() || !gt_only.empty()) {
        std::cerr << "eval: " << pred_only.size() + gt_only.size() << " unmatched file(s)\n";
        return 2;
    }
    if (matched.empty()) {
        std::cerr << "eval: no matching image pairs\n";
        return 2;
    }
    return 0;
}

int cmd_train(const CLI::App* cmd, const std::string& dataset, const std::string& config_path,
              const std::string& out_weights, uint64_t seed, float width_multiplier,
              int max_cycles, int batch, float lr_a, float lr_etm, float lr_b) {
    json cfg = load_config(config_path);
    resolve(cmd, "--seed", cfg, "seed", seed);
    resolve(cmd, "--width-multiplier", cfg, "width_multiplier", width_multiplier);
    resolve(cmd, "--cycles", cfg, "max_cycles", max_cycles);
    resolve(cmd, "--batch", cfg, "batch_size", batch);
    resolve(cmd, "--lr-a", cfg, "lr_a", lr_a);
    resolve(cmd, "--lr-etm", cfg, "lr_a_etm", lr_etm);
    resolve(cmd, "--lr-b", cfg, "lr_b", lr_b);

    net::FwbModuleConfig fcfg;
    fcfg.width_multiplier = width_multiplier;
    net::EtmConfig ecfg;
    ecfg.fusion_channels = cfg.value("fusion_channels", ecfg.fusion_channels);
    net::TrainSchedule sched;
    sched.phase_a_steps = cfg.value("phase_a_steps", sched.phase_a_steps);
    sched.phase_b_steps = cfg.value("phase_b_steps", sched.phase_b_steps);
    sched.converge_rel_improvement =
        cfg.value("converge_rel_improvement", sched.converge_rel_improvement);
    sched.max_cycles = max_cycles;
    sched.batch_size = batch;
    sched.lr_a = lr_a;
    sched.lr_a_etm = lr_etm;
    sched.lr_b = lr_b;
    sched.seed = seed;

    net::TrainOptions opts;
    opts.split = cfg.value("split", std::string("train"));
    opts.fwb_domain_floor = cfg.value("fwb_domain_floor", opts.fwb_domain_floor);
    fs::create_directories(out_weights);
    opts.log_path = out_weights + "/metrics.jsonl";

    net::NetWeights prev;
    std::string digest = net::config_digest(fcfg, ecfg, sched);
    if (fs::exists(out_weights + "/manifest.json")) {
        prev = net::load_weights(out_weights);
        if (prev.config_digest != digest)
            fail(ErrorCode::Data, "train: resume refused, existing weights in " + out_weights +
                                      " were trained with a different config");
        int64_t total = int64_t(sched.max_cycles) * (sched.phase_a_steps + sched.phase_b_steps);
        if (prev.converged || prev.steps >= total) {
            std::cout << "training already complete (" << prev.steps << " steps)\n";
            return 0;
        }
        opts.resume = &prev;
        std::cout << "resuming from step " << prev.steps << "\n";
    }

    net::TrainResult res = net::train(dataset, fcfg, ecfg, sched, opts);
    net::save_weights(out_weights, res.weights);

    json man;
    man["command"] = "train";
    man["dataset"] = dataset;
    man["seed"] = seed;
    man["width_multiplier"] = width_multiplier;
    man["fusion_channels"] = ecfg.fusion_channels;
    man["phase_a_steps"] = sched.phase_a_steps;
    man["phase_b_steps"] = sched.phase_b_steps;
    man["max_cycles"] = sched.max_cycles;
    man["batch_size"] = sched.batch_size;
    man["lr_a"] = sched.lr_a;
    man["lr_a_etm"] = sched.lr_a_etm;
    man["lr_b"] = sched.lr_b;
    man["split"] = opts.split;
    man["fwb_domain_floor"] = opts.fwb_domain_floor;
    man["steps_run"] = res.weights.steps;
    man["cycles_run"] = res.cycles_run;
    man["converged"] = res.converged;
    man["fwb_floor_warnings"] = res.fwb_floor_warnings;
    man["config_digest"] = digest;
    write_json(out_weights + "/train_manifest.json", man);
    std::cout << "trained " << res.weights.steps << " steps (" << res.cycles_run
              << " cycles), weights in " << out_weights << "\n";
    return 0;
}

int cmd_retrofit(const std::string& in_path, const std::string& a_map_path,
                 const std::string& method, const std::string& out_path,
                 const std::string& dump_t) {
    if (method != "dcp")
        fail(ErrorCode::Usage, "retrofit: only method 'dcp' is available");
    Image hazy = load_any_image(in_path);
    Image a_img = fwbt::read_image(a_map_path);
    if (a_img.height != hazy.height || a_img.width != hazy.width)
        fail(ErrorCode::Data, "retrofit: light map dimensions do not match the image");
    haze::LightMap a_map;
    a_map.height = a_img.height;
    a_map.width = a_img.width;
    a_map.data = std::move(a_img.data);
    haze::validate_light_map(a_map, "retrofit light map");

    dcp::DcpParams params;
    haze::Rgb a_scalar = dcp::estimate_airlight_scalar(hazy, params);
    haze::TransmissionMap t = dcp::dcp_transmission(hazy, a_scalar, params);
    Image j = dcp::retrofit_dehaze(hazy, t, a_map);
    io::save_image(j, out_path);
    if (!dump_t.empty()) {
        ScalarField tf(t.height, t.width);
        tf.data = t.data;
        fwbt::write_field(dump_t, tf);
    }

    json man;
    man["command"] = "retrofit";
    man["method"] = method;
    man["input"] = in_path;
    man["a_map"] = a_map_path;
    man["output"] = out_path;
    man["classical_airlight"] = {a_scalar.r, a_scalar.g, a_scalar.b};
    write_json(out_path + ".manifest.json", man);
    return 0;
}

int cmd_color(const std::string& op, const std::string& a_arg, const std::string& b_arg,
              const std::string& mode_name) {
    color::LabMode mode = mode_name == "simplified" ? color::LabMode::Simplified
                                                    : color::LabMode::Exact;
    json out;
    auto is_path = [](const std::string& s) {
        return s.find(',') == std::string::npos;
    };
    if (op == "rgb2lab") {
        if (is_path(a_arg)) {
            Image img = load_any_image(a_arg);
            color::LabImage lab = color::rgb_to_lab(img, mode);
            double l = 0, aa = 0, bb = 0;
            for (size_t p = 0; p < lab.data.size(); p += 3) {
                l += lab.data[p];
                aa += lab.data[p + 1];
                bb += lab.data[p + 2];
            }
            double n = double(lab.data.size()) / 3.0;
            out["mean_lab"] = {l / n, aa / n, bb / n};
        } else {
            auto rgb = parse_triple(a_arg, "--a");
            double lab[3], in[3] = {rgb[0], rgb[1], rgb[2]};
            color::detail::rgb_to_lab_px(in, lab, mode);
            out["lab"] = {lab[0], lab[1], lab[2]};
        }
    } else if (op == "ciede") {
        if (b_arg.empty()) fail(ErrorCode::Usage, "color: --b is required for ciede");
        if (is_path(a_arg)) {
            Image ia = load_any_image(a_arg), ib = load_any_image(b_arg);
            auto la = color::rgb_to_lab(ia, mode), lb = color::rgb_to_lab(ib, mode);
            out["ciede2000"] = metrics::ciede2000(la, lb).mean;
        } else {
            auto la = parse_triple(a_arg, "--a"), lb = parse_triple(b_arg, "--b");
            out["ciede2000"] =
                metrics::ciede2000_pair(la[0], la[1], la[2], lb[0], lb[1], lb[2]);
        }
    } else {
        fail(ErrorCode::Usage, "color: unknown op " + op);
    }
    out["mode"] = mode_name;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("HAZELAB_THREADS"))
        set_threads(std::atoi(threads));

    CLI::App app{"haze synthesis, dehazing and evaluation toolkit"};
    app.require_subcommand(1);
    std::string workdir;
    app.add_option("--workdir", workdir, "resolve all paths relative to this directory");

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize hazy scenes from clean/depth pairs");
    std::string sy_clean, sy_out, sy_cfg;
    float sy_beta = 0.35f, sy_amin = 0.3f, sy_amax = 1.5f, sy_pert = 0.2f;
    uint64_t sy_seed = 0;
    double sy_split = 0.69;
    synth->add_option("--clean-dir", sy_clean, "dataset with scenes/<id>/clean.png + depth.fwbt")
        ->required();
    synth->add_option("--out", sy_out, "output dataset directory")->required();
    synth->add_option("--beta", sy_beta, "extinction coefficient");
    synth->add_option("--a-min", sy_amin, "base light range low");
    synth->add_option("--a-max", sy_amax, "base light range high");
    synth->add_option("--perturb", sy_pert, "per-pixel light disturbance fraction");
    synth->add_option("--seed", sy_seed, "master seed");
    synth->add_option("--split", sy_split, "train fraction");
    synth->add_option("--config", sy_cfg, "JSON config (flags take precedence)");

    // dehaze
    auto* dehaze = app.add_subcommand("dehaze", "dehaze one image");
    std::string dh_method = "dcp", dh_weights, dh_in, dh_out, dh_dump_t, dh_dump_a;
    dehaze->add_option("--method", dh_method, "dcp|fwbnet")
        ->check(CLI::IsMember({"dcp", "fwbnet"}));
    dehaze->add_option("--weights", dh_weights, "weights directory (fwbnet)");
    dehaze->add_option("--in", dh_in, "hazy image (.png or .fwbt)")->required();
    dehaze->add_option("--out", dh_out, "output image (.png)")->required();
    dehaze->add_option("--dump-t", dh_dump_t, "write the transmission map (.fwbt)");
    dehaze->add_option("--dump-a", dh_dump_a, "write the light map (.fwbt)");

    // eval
    auto* eval = app.add_subcommand("eval", "PSNR/SSIM/CIEDE2000 over matching images");
    std::string ev_pred, ev_gt, ev_report;
    eval->add_option("--pred-dir", ev_pred, "predictions directory")->required();
    eval->add_option("--gt-dir", ev_gt, "ground-truth directory")->required();
    eval->add_option("--report", ev_report, "output JSON report")->required();

    // train
    auto* train = app.add_subcommand("train", "train the dehazing network");
    std::string tr_dataset, tr_cfg, tr_out;
    uint64_t tr_seed = 0;
    float tr_mult = 0.25f, tr_lra = 1e-4f, tr_lretm = 1e-2f, tr_lrb = 3e-4f;
    int tr_cycles = 3, tr_batch = 4;
    train->add_option("--dataset", tr_dataset, "dataset directory")->required();
    train->add_option("--config", tr_cfg, "JSON training config");
    train->add_option("--out-weights", tr_out, "output weights directory")->required();
    train->add_option("--seed", tr_seed, "training seed");
    train->add_option("--width-multiplier", tr_mult, "U-Net width multiplier");
    train->add_option("--cycles", tr_cycles, "number of alternating cycles");
    train->add_option("--batch", tr_batch, "mini-batch size");
    train->add_option("--lr-a", tr_lra, "phase-A light-map learning rate");
    train->add_option("--lr-etm", tr_lretm, "phase-A transmission learning rate");
    train->add_option("--lr-b", tr_lrb, "phase-B learning rate");

    // retrofit
    auto* retro = app.add_subcommand("retrofit", "classical dehazing with a supplied light map");
    std::string rf_in, rf_amap, rf_method = "dcp", rf_out, rf_dump_t;
    retro->add_option("--in", rf_in, "hazy image (.png or .fwbt)")->required();
    retro->add_option("--a-map", rf_amap, "light map (.fwbt, H x W x 3)")->required();
    retro->add_option("--method", rf_method, "classical method (dcp)");
    retro->add_option("--out", rf_out, "output image (.png)")->required();
    retro->add_option("--dump-t", rf_dump_t, "write the transmission used (.fwbt)");

    // color
    auto* colorc = app.add_subcommand("color", "colorspace debugging");
    std::string co_op, co_a, co_b, co_mode = "exact";
    colorc->add_option("--op", co_op, "rgb2lab|ciede")->required();
    colorc->add_option("--a", co_a, "triple 'x,y,z' or image path")->required();
    colorc->add_option("--b", co_b, "second triple or image path (ciede)");
    colorc->add_option("--mode", co_mode, "exact|simplified")
        ->check(CLI::IsMember({"exact", "simplified"}));

    try {
        app.parse(argc, argv);
        if (!workdir.empty()) fs::current_path(workdir);
        if (*synth)
            return cmd_synth(synth, sy_clean, sy_out, sy_beta, sy_amin, sy_amax, sy_pert,
                             sy_seed, sy_split, sy_cfg);
        if (*dehaze)
            return cmd_dehaze(dh_method, dh_weights, dh_in, dh_out, dh_dump_t, dh_dump_a);
        if (*eval) return cmd_eval(ev_pred, ev_gt, ev_report);
        if (*train)
            return cmd_train(train, tr_dataset, tr_cfg, tr_out, tr_seed, tr_mult, tr_cycles,
                             tr_batch, tr_lra, tr_lretm, tr_lrb);
        if (*retro) return cmd_retrofit(rf_in, rf_amap, rf_method, rf_out, rf_dump_t);
        if (*colorc) return cmd_color(co_op, co_a, co_b, co_mode);
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
    return 1;
}
