#include "hazelab/net/fwb_net.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "hazelab/error.hpp"
#include "hazelab/fwbt.hpp"
#include "hazelab/parallel.hpp"

namespace fs = std::filesystem;

namespace hazelab::net {

int FwbModuleConfig::channels_at(int level) const {
    if (level < 1 || level > levels)
        fail(ErrorCode::Usage, "fwb config: level out of range");
    int base = std::max(1, int(std::lround(double(base_channels) * double(width_multiplier))));
    return base << (level - 1);
}

nn::Graph build_fwb_module(const FwbModuleConfig& cfg, uint64_t seed, int batch, int height,
                           int width) {
    if (height % 8 != 0 || width % 8 != 0)
        fail(ErrorCode::Data, "fwb module: input H and W must be divisible by 8");
    SplitMix64 rng(seed);
    nn::Graph g("fwb_module");
    int cur = g.add_input("image", {batch, 3, height, width});

    std::vector<int> skips;
    for (int level = 1; level <= cfg.levels; ++level) {
        int c = cfg.channels_at(level);
        std::string tag = "enc" + std::to_string(level);
        cur = g.relu(g.conv2d_same(cur, c, 3, 1, rng, tag + ".conv1"));
        cur = g.relu(g.conv2d_same(cur, c, 3, 1, rng, tag + ".conv2"));
        if (level < cfg.levels) {
            skips.push_back(cur);
            cur = g.maxpool2(cur);
        }
    }
    // The deepest level doubles as the decoder bottleneck.
    for (int level = cfg.levels - 1; level >= 1; --level) {
        int c = cfg.channels_at(level);
        std::string tag = "dec" + std::to_string(level);
        cur = g.conv_transpose2d(cur, c, 2, rng, tag + ".up");
        cur = g.concat({cur, skips[size_t(level - 1)]});
        cur = g.relu(g.conv2d_same(cur, c, 3, 1, rng, tag + ".conv1"));
        cur = g.relu(g.conv2d_same(cur, c, 3, 1, rng, tag + ".conv2"));
    }
    int head = g.conv2d_same(cur, 3, 1, 1, rng, "head", kFwbHeadBiasInit);
    g.set_output(head);
    return g;
}

nn::Graph build_etm(const EtmConfig& cfg, uint64_t seed, int batch, int height, int width) {
    SplitMix64 rng(seed);
    nn::Graph g("etm");
    int in = g.add_input("image", {batch, 3, height, width});

    std::vector<int> branches;
    int cm = g.channel_min(in);
    for (int k : cfg.minpool_kernels) branches.push_back(g.minpool(cm, k));
    for (size_t i = 0; i < cfg.conv_specs.size(); ++i) {
        const auto& spec = cfg.conv_specs[i];
        std::string tag = "branch" + std::to_string(i) + ".k" + std::to_string(spec.kernel) +
                          "d" + std::to_string(spec.dilation);
        branches.push_back(
            g.relu(g.conv2d_same(in, cfg.fusion_channels, spec.kernel, spec.dilation, rng, tag)));
    }
    int cat = g.concat(branches);
    int fuse = g.conv2d_same(cat, 1, 1, 1, rng, "fusion", kEtmFusionBiasInit);
    int b = g.brelu(fuse);
    // max(x, t_min) composed from catalog ops: relu(x - t_min) + t_min.
    int out = g.scalar_affine(g.relu(g.scalar_affine(b, 1.f, -cfg.t_min)), 1.f, cfg.t_min);
    g.set_output(out);
    return g;
}

nn::Graph build_refine(uint64_t seed, int batch, int height, int width) {
    SplitMix64 rng(seed);
    nn::Graph g("refine");
    int in = g.add_input("j0", {batch, 3, height, width});
    int conv = g.conv2d_same(in, 3, 3, 1, rng, "refine");
    g.set_output(g.brelu(conv));
    return g;
}

std::map<std::string, Tensor4> identity_refine_params() {
    Tensor4 w(3, 3, 3, 3, 0.f);
    for (int c = 0; c < 3; ++c) w.at(c, c, 1, 1) = 1.f;
    std::map<std::string, Tensor4> p;
    p["refine.weight"] = std::move(w);
    p["refine.bias"] = Tensor4(1, 3, 1, 1, 0.f);
    return p;
}

namespace {

void check_physics_shapes(const Tensor4& hazy, const Tensor4& t, const Tensor4& a) {
    if (a.shape != hazy.shape)
        fail(ErrorCode::Data, "physics: light map shape mismatch");
    if (t.shape[0] != hazy.shape[0] || t.shape[1] != 1 || t.shape[2] != hazy.shape[2] ||
        t.shape[3] != hazy.shape[3])
        fail(ErrorCode::Data, "physics: transmission shape mismatch");
}

}  // namespace

Tensor4 physics_forward(const Tensor4& hazy, const Tensor4& t, const Tensor4& a, float t_min) {
    check_physics_shapes(hazy, t, a);
    const int n = hazy.shape[0], h = hazy.shape[2], w = hazy.shape[3];
    Tensor4 out(n, 3, h, w);
    parallel_for(n * h, [&](int row) {
        int nn = row / h, y = row % h;
        for (int x = 0; x < w; ++x) {
            float tv = std::max(t.at(nn, 0, y, x), t_min);
            for (int c = 0; c < 3; ++c) {
                float av = a.at(nn, c, y, x);
                out.at(nn, c, y, x) = (hazy.at(nn, c, y, x) - av) / tv + av;
            }
        }
    });
    return out;
}

PhysicsGrads physics_backward(const Tensor4& hazy, const Tensor4& t, const Tensor4& a,
                              float t_min, const Tensor4& dj0) {
    check_physics_shapes(hazy, t, a);
    if (dj0.shape != hazy.shape) fail(ErrorCode::Data, "physics: upstream shape mismatch");
    const int n = hazy.shape[0], h = hazy.shape[2], w = hazy.shape[3];
    PhysicsGrads g{Tensor4(n, 3, h, w), Tensor4(n, 1, h, w)};
    parallel_for(n * h, [&](int row) {
        int nn = row / h, y = row % h;
        for (int x = 0; x < w; ++x) {
            float traw = t.at(nn, 0, y, x);
            float tv = std::max(traw, t_min);
            float dt_acc = 0.f;
            for (int c = 0; c < 3; ++c) {
                float up = dj0.at(nn, c, y, x);
                g.da.at(nn, c, y, x) = up * (1.f - 1.f / tv);
                dt_acc += up * (-(hazy.at(nn, c, y, x) - a.at(nn, c, y, x)) / (tv * tv));
            }
            // Subgradient 0 where the floor is active.
            g.dt.at(nn, 0, y, x) = traw > t_min ? dt_acc : 0.f;
        }
    });
    return g;
}

namespace {

Tensor4 image_to_tensor(const Image& img) {
    Tensor4 t(1, 3, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = img.at(y, x, c);
    return t;
}

Image tensor_to_image(const Tensor4& t) {
    Image img(t.shape[2], t.shape[3]);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = t.at(0, c, y, x);
    return img;
}

}  // namespace

Image ehim(const Image& hazy, const haze::TransmissionMap& t, const haze::LightMap& a,
           const std::map<std::string, Tensor4>& refine_params, float t_min) {
    if (t.height != hazy.height || t.width != hazy.width || a.height != hazy.height ||
        a.width != hazy.width)
        fail(ErrorCode::Data, "ehim: dimension mismatch");
    Tensor4 ht = image_to_tensor(hazy);
    Tensor4 tt(1, 1, hazy.height, hazy.width);
    tt.data = t.data;
    Tensor4 at(1, 3, hazy.height, hazy.width);
    for (int y = 0; y < hazy.height; ++y)
        for (int x = 0; x < hazy.width; ++x)
            for (int c = 0; c < 3; ++c) at.at(0, c, y, x) = a.at(y, x, c);

    Tensor4 j0 = physics_forward(ht, tt, at, t_min);
    nn::Graph refine = build_refine(0, 1, hazy.height, hazy.width);
    apply_params(refine, refine_params);
    Tensor4 j = refine.forward({{"j0", j0}});
    return tensor_to_image(j);
}

std::map<std::string, Tensor4> extract_params(const nn::Graph& g) {
    std::map<std::string, Tensor4> out;
    for (const auto& p : g.params()) out[p.name] = p.value;
    return out;
}

void apply_params(nn::Graph& g, const std::map<std::string, Tensor4>& params) {
    for (auto& p : g.params()) {
        auto it = params.find(p.name);
        if (it == params.end())
            fail(ErrorCode::Data, g.name() + ": missing parameter " + p.name);
        if (it->second.shape != p.value.shape)
            fail(ErrorCode::Data, g.name() + ": shape mismatch for parameter " + p.name);
        p.value = it->second;
    }
}

// ---------------------------------------------------------------------------
// Weight serialization: manifest.json + one FWBT file per parameter.

namespace {

constexpr int kWeightsFormatVersion = 1;

nlohmann::json params_json(const std::map<std::string, Tensor4>& params) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [name, t] : params) {
        nlohmann::json e;
        e["name"] = name;
        e["shape"] = {t.shape[0], t.shape[1], t.shape[2], t.shape[3]};
        arr.push_back(e);
    }
    return arr;
}

void write_param_files(const std::string& dir, const std::map<std::string, Tensor4>& params) {
    fs::create_directories(dir);
    for (const auto& [name, t] : params) fwbt::write_tensor(dir + "/" + name + ".fwbt", t);
}

std::map<std::string, Tensor4> read_param_files(const std::string& dir,
                                                const nlohmann::json& manifest_params) {
    std::map<std::string, Tensor4> out;
    for (const auto& e : manifest_params) {
        std::string name = e.at("name").get<std::string>();
        std::string path = dir + "/" + name + ".fwbt";
        if (!fs::exists(path))
            fail(ErrorCode::Data, "weights: missing parameter file " + path);
        Tensor4 t = fwbt::read_tensor(path);
        auto shape = e.at("shape").get<std::vector<int>>();
        if (shape.size() != 4 || t.shape[0] != shape[0] || t.shape[1] != shape[1] ||
            t.shape[2] != shape[2] || t.shape[3] != shape[3])
            fail(ErrorCode::Data, "weights: manifest/shape mismatch for " + name);
        out[name] = std::move(t);
    }
    return out;
}

}  // namespace

void save_weights(const std::string& dir, const NetWeights& w) {
    fs::create_directories(dir);

    // Operator lists are shape-independent; build at the smallest legal size.
    nn::Graph fwb = build_fwb_module(w.fwb_cfg, 0, 1, 8, 8);
    nn::Graph etm = build_etm(w.etm_cfg, 0, 1, 8, 8);
    nn::Graph refine = build_refine(0, 1, 8, 8);

    nlohmann::json m;
    m["format_version"] = kWeightsFormatVersion;
    m["name"] = "fwb_net";
    m["seed"] = w.seed;
    m["steps"] = w.steps;
    m["converged"] = w.converged;
    m["config_digest"] = w.config_digest;
    m["fwb"] = {{"levels", w.fwb_cfg.levels},
                {"base_channels", w.fwb_cfg.base_channels},
                {"width_multiplier", w.fwb_cfg.width_multiplier},
                {"convs_per_level", w.fwb_cfg.convs_per_level},
                {"operators", fwb.operator_list()},
                {"params", params_json(w.fwb_params)}};
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& s : w.etm_cfg.conv_specs) specs.push_back({s.kernel, s.dilation});
    m["etm"] = {{"minpool_kernels", w.etm_cfg.minpool_kernels},
                {"conv_specs", specs},
                {"fusion_channels", w.etm_cfg.fusion_channels},
                {"t_min", w.etm_cfg.t_min},
                {"operators", etm.operator_list()},
                {"params", params_json(w.etm_params)}};
    m["refine"] = {{"operators", refine.operator_list()}, {"params", params_json(w.refine_params)}};

    std::ofstream out(dir + "/manifest.json");
    if (!out) fail(ErrorCode::Data, "weights: cannot write manifest in " + dir);
    out << m.dump(2) << "\n";

    write_param_files(dir + "/fwb", w.fwb_params);
    write_param_files(dir + "/etm", w.etm_params);
    write_param_files(dir + "/refine", w.refine_params);
}

NetWeights load_weights(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) fail(ErrorCode::Data, "weights: missing manifest in " + dir);
    nlohmann::json m;
    try {
        in >> m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Data, "weights: malformed manifest: " + std::string(e.what()));
    }
    if (m.value("format_version", -1) != kWeightsFormatVersion)
        fail(ErrorCode::Data, "weights: format version mismatch in " + dir);

    NetWeights w;
    w.seed = m.value("seed", uint64_t(0));
    w.steps = m.value("steps", int64_t(0));
    w.converged = m.value("converged", false);
    w.config_digest = m.value("config_digest", "");
    const auto& jf = m.at("fwb");
    w.fwb_cfg.levels = jf.value("levels", 4);
    w.fwb_cfg.base_channels = jf.value("base_channels", 24);
    w.fwb_cfg.width_multiplier = jf.value("width_multiplier", 1.0f);
    w.fwb_cfg.convs_per_level = jf.value("convs_per_level", 2);
    const auto& je = m.at("etm");
    w.etm_cfg.minpool_kernels = je.value("minpool_kernels", std::vector<int>{3, 5, 7, 9, 11});
    w.etm_cfg.conv_specs.clear();
    for (const auto& s : je.at("conv_specs"))
        w.etm_cfg.conv_specs.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    w.etm_cfg.fusion_channels = je.value("fusion_channels", 16);
    w.etm_cfg.t_min = je.value("t_min", 0.05f);

    w.fwb_params = read_param_files(dir + "/fwb", jf.at("params"));
    w.etm_params = read_param_files(dir + "/etm", je.at("params"));
    w.refine_params = read_param_files(dir + "/refine", m.at("refine").at("params"));
    return w;
}

DehazeOutput forward_dehaze(const NetWeights& w, const Image& hazy) {
    if (hazy.height % 8 != 0 || hazy.width % 8 != 0)
        fail(ErrorCode::Data, "forward_dehaze: H and W must be divisible by 8 (pad first)");
    Tensor4 input = image_to_tensor(hazy);

    nn::Graph fwb = build_fwb_module(w.fwb_cfg, 0, 1, hazy.height, hazy.width);
    apply_params(fwb, w.fwb_params);
    Tensor4 a_est = fwb.forward({{"image", input}});

    nn::Graph etm = build_etm(w.etm_cfg, 0, 1, hazy.height, hazy.width);
    apply_params(etm, w.etm_params);
    Tensor4 t_est = etm.forward({{"image", input}});

    Tensor4 j0 = physics_forward(input, t_est, a_est, w.etm_cfg.t_min);
    nn::Graph refine = build_refine(0, 1, hazy.height, hazy.width);
    apply_params(refine, w.refine_params);
    Tensor4 j = refine.forward({{"j0", j0}});

    DehazeOutput out;
    out.j = tensor_to_image(j);
    out.t.height = hazy.height;
    out.t.width = hazy.width;
    out.t.data = t_est.data;
    out.a.height = hazy.height;
    out.a.width = hazy.width;
    out.a.data.resize(size_t(hazy.height) * hazy.width * 3);
    for (int y = 0; y < hazy.height; ++y)
        for (int x = 0; x < hazy.width; ++x)
            for (int c = 0; c < 3; ++c) out.a.at(y, x, c) = a_est.at(0, c, y, x);
    return out;
}

Image pad_reflect_to_multiple(const Image& img, int multiple) {
    int ph = (multiple - img.height % multiple) % multiple;
    int pw = (multiple - img.width % multiple) % multiple;
    if (ph == 0 && pw == 0) return img;
    if (ph >= img.height || pw >= img.width)
        fail(ErrorCode::Data, "pad_reflect: image too small to pad to a multiple of " +
                                  std::to_string(multiple));
    Image out(img.height + ph, img.width + pw);
    for (int y = 0; y < out.height; ++y) {
        int sy = y < img.height ? y : 2 * img.height - 2 - y;
        for (int x = 0; x < out.width; ++x) {
            int sx = x < img.width ? x : 2 * img.width - 2 - x;
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

}  // namespace hazelab::net
