#pragma once

// The dehazing network: a 4-level U-Net that regresses the per-pixel
// atmospheric light map, a multi-scale min-pool + dilated-conv branch network
// that estimates the transmission map, and a final module that inverts the
// haze model and refines the result with a 3x3 conv + brelu.

#include <cstdint>
#include <map>
#include <string>

#include "hazelab/haze.hpp"
#include "hazelab/image.hpp"
#include "hazelab/nn/graph.hpp"
#include "hazelab/tensor.hpp"

namespace hazelab::net {

struct FwbModuleConfig {
    int levels = 4;
    int base_channels = 24;
    float width_multiplier = 1.0f;  // toy runs use 0.25
    int convs_per_level = 2;

    // Channels double per level: level 1 has round(base * multiplier).
    int channels_at(int level) const;
};

struct EtmConfig {
    std::vector<int> minpool_kernels = {3, 5, 7, 9, 11};
    struct ConvSpec {
        int kernel;
        int dilation;
    };
    std::vector<ConvSpec> conv_specs = {{3, 1}, {5, 1}, {7, 2}, {7, 3}};
    int fusion_channels = 16;
    float t_min = 0.05f;
};

// Head biases start mid-range so the CIELAB cube-root domain (light map) and
// the brelu active region (transmission) see gradients from step one.
inline constexpr float kFwbHeadBiasInit = 1.0f;
inline constexpr float kEtmFusionBiasInit = 0.5f;

// U-Net: per level two same-padding 3x3 convs + relu, 2x2 maxpool between
// levels, then per decoder level a stride-2 transposed conv, skip concat and
// two convs + relu; linear 1x1 head with 3 channels. Input H,W must be
// divisible by 8.
nn::Graph build_fwb_module(const FwbModuleConfig& cfg, uint64_t seed, int batch, int height,
                           int width);

// Branch 1: five min-pools over the channel minimum; branch 2: parallel convs
// per conv_specs; concat, 1x1 fusion conv, brelu, then an affine/relu floor
// composition that pins the output to [t_min, 1].
nn::Graph build_etm(const EtmConfig& cfg, uint64_t seed, int batch, int height, int width);

// 3x3 conv (3->3) + brelu, identity-initialised: with identity params the
// module reduces to clamp01 of its input.
nn::Graph build_refine(uint64_t seed, int batch, int height, int width);
std::map<std::string, Tensor4> identity_refine_params();

// Differentiable haze-model inversion: J0 = (I - A)/max(t, t_min) + A with t
// of shape (N,1,H,W) broadcast over channels.
Tensor4 physics_forward(const Tensor4& hazy, const Tensor4& t, const Tensor4& a, float t_min);
struct PhysicsGrads {
    Tensor4 da;
    Tensor4 dt;
};
PhysicsGrads physics_backward(const Tensor4& hazy, const Tensor4& t, const Tensor4& a,
                              float t_min, const Tensor4& dj0);

// Haze-model inversion + refinement conv + brelu on plain containers.
Image ehim(const Image& hazy, const haze::TransmissionMap& t, const haze::LightMap& a,
           const std::map<std::string, Tensor4>& refine_params, float t_min = 0.05f);

struct NetWeights {
    FwbModuleConfig fwb_cfg;
    EtmConfig etm_cfg;
    std::map<std::string, Tensor4> fwb_params;
    std::map<std::string, Tensor4> etm_params;
    std::map<std::string, Tensor4> refine_params;
    uint64_t seed = 0;
    int64_t steps = 0;
    bool converged = false;
    std::string config_digest;  // set by the trainer; guards resume
};

// Directory form: manifest.json + one FWBT file per parameter.
void save_weights(const std::string& dir, const NetWeights& w);
NetWeights load_weights(const std::string& dir);

std::map<std::string, Tensor4> extract_params(const nn::Graph& g);
void apply_params(nn::Graph& g, const std::map<std::string, Tensor4>& params);

struct DehazeOutput {
    Image j;                  // in [0,1]
    haze::TransmissionMap t;  // in [t_min, 1]
    haze::LightMap a;
};

// Runs the three modules on one image; H and W must be divisible by 8.
DehazeOutput forward_dehaze(const NetWeights& w, const Image& hazy);

// Reflective padding helper for arbitrary input sizes (pad, run, crop back).
Image pad_reflect_to_multiple(const Image& img, int multiple);

}  // namespace hazelab::net
