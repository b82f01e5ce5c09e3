#pragma once

#include "mallsim/experiment.hpp"

namespace mallsim::calibration {

/// Reference resize overheads of the synchronous dynamic workloads.
struct Targets {
    Seconds baseline_accumulated = 189.43;
    Seconds merge_accumulated = 112.88;
    double resize_speedup = 1.15;  // median Baseline / median Merge per-resize time
    double speedup_weight = 4.0;
};

struct Outcome {
    Seconds baseline_accumulated = 0.0;
    Seconds merge_accumulated = 0.0;
    double resize_speedup = 0.0;
};

/// Runs Baseline and Merge over the config's seeds with `params`.
Outcome evaluate(const experiment::RunConfig& cfg, const reconfig::CostParams& params);

/// Squared log-errors against the targets; the speedup term carries `speedup_weight`.
double loss(const Outcome& o, const Targets& t);

struct Result {
    reconfig::CostParams params;
    Outcome outcome;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Fits spawn_fixed, spawn_per_rank, and redist_bandwidth (in log space)
/// starting from `cfg.costs`; the async and iteration-speedup constants
/// are carried over unchanged.
Result calibrate(const experiment::RunConfig& cfg, const Targets& targets = {},
                 int max_iterations = 400);

}  // namespace mallsim::calibration
