#pragma once

// Alternating training schedule: phase A trains the light-map U-Net with the
// CIELAB loss and the transmission network with MSE (same mini-batch, separate
// optimizers); phase B trains all parameters end-to-end with MSE against the
// clean image. Phases alternate every phase_*_steps until the per-phase losses
// improve by less than converge_rel_improvement over a full cycle, or
// max_cycles is reached. One iteration = one mini-batch SGD step. The loop is
// deterministic for a fixed seed.

#include <cstdint>
#include <string>
#include <vector>

#include "hazelab/net/fwb_net.hpp"

namespace hazelab::net {

struct TrainSchedule {
    int phase_a_steps = 100;
    int phase_b_steps = 100;
    int max_cycles = 3;
    double converge_rel_improvement = 0.01;
    int batch_size = 4;
    // Phase A runs two independent optimizers: the CIELAB light-map loss has
    // steep cube-root curvature and needs a small step, while the plain-MSE
    // transmission branch tolerates a much larger one. Both defaults were
    // picked by stability scans at toy scale; larger lr_a diverges.
    float lr_a = 1e-4f;
    float lr_a_etm = 1e-2f;
    float lr_b = 3e-4f;
    uint64_t seed = 0;
};

struct LogRecord {
    int64_t step = 0;
    char phase = 'A';
    std::string loss_name;
    double value = 0.0;
};

struct TrainOptions {
    std::string split = "train";
    std::string log_path;              // metrics as line-delimited JSON, optional
    double fwb_domain_floor = 1e-3;    // light-map loss domain guard
    const NetWeights* resume = nullptr;
};

struct TrainResult {
    NetWeights weights;
    std::vector<LogRecord> log;
    long fwb_floor_warnings = 0;
    int cycles_run = 0;
    bool converged = false;
};

// Serialized (config, schedule) fingerprint; resume is refused on mismatch.
std::string config_digest(const FwbModuleConfig& fcfg, const EtmConfig& ecfg,
                          const TrainSchedule& sched);

TrainResult train(const std::string& dataset_dir, const FwbModuleConfig& fcfg,
                  const EtmConfig& ecfg, const TrainSchedule& sched,
                  const TrainOptions& opts = {});

}  // namespace hazelab::net
