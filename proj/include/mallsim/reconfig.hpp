#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mallsim/model.hpp"

namespace mallsim::reconfig {

class InvalidRank : public Error {
public:
    using Error::Error;
};

class UndersizedDimension : public Error {
public:
    using Error::Error;
};

enum class SpawnMethod { Baseline, Merge };
enum class RedistMethod { Collective };

std::string_view to_string(SpawnMethod m);

/// Malleability-engine parameters for one resize.
struct MamConfig {
    SpawnMethod spawn_method = SpawnMethod::Merge;
    bool parallel = true;   // Parallel spawn strategy
    bool intracomm = false; // Baseline only
    bool async = false;     // background spawn/redistribution
    RedistMethod redist_method = RedistMethod::Collective;
    bool user_override = false;

    bool operator==(const MamConfig&) const = default;
};

/// Picks the spawn method and strategies for an ns -> nt resize. `original_ranks`
/// is the communicator size at job startup. A present override wins unchanged.
MamConfig choose_config(int ns, int nt, int original_ranks,
                        const std::optional<MamConfig>& override_config = std::nullopt);

/// Processes launched by a resize: Baseline relaunches all nt, Merge only the growth.
int spawn_count(SpawnMethod method, int ns, int nt);

/// Peak memory of a resize in data units.
double memory_required(SpawnMethod method, double problem_size, int ns, int nt, double constant);

/// Half-open [ini, end) range of N-planes owned by a rank.
struct Block {
    int ini = 0;
    int end = 0;
    int n = 0;

    bool operator==(const Block&) const = default;
};

/// Balanced block distribution: the first n_dim % size ranks take one extra plane.
Block block_distribution(int n_dim, int size, int rank);

struct Transfer {
    int source = 0;
    int target = 0;
    int slices = 0;

    bool operator==(const Transfer&) const = default;
};

/// Who sends which planes when a block-distributed dimension moves from
/// ns to nt ranks. Every array is redistributed with the same plan.
struct MessagePlan {
    int n_dim = 0;
    int ns = 0;
    int nt = 0;
    double slice_volume = 0.0;
    int array_count = 4;  // x, u1, u2, u3
    std::vector<Transfer> transfers;

    /// Planes whose owning rank index changes (per array).
    long long moved_slices() const;
    /// Data units crossing rank boundaries, all arrays.
    double moved_volume() const { return double(moved_slices()) * slice_volume * array_count; }
};

MessagePlan redistribution_plan(int n_dim, double slice_volume, int ns, int nt,
                                int array_count = 4);

/// Shape of the resize cost model. Async factors divide the synchronous
/// duration; iteration speedups dilate iterations overlapped with a resize.
struct CostParams {
    Seconds spawn_fixed = 0.5;
    Seconds spawn_per_rank = 1e-3;
    double redist_bandwidth = 1e9;  // data units per second
    double mam_constant_c = 0.0;
    double async_resize_factor_baseline = 0.22;
    double async_resize_factor_merge = 0.38;
    double is_baseline_async = 0.41;
    double is_merge_async = 0.60;

    void validate() const;  // throws Error
    bool operator==(const CostParams&) const = default;
};

std::string to_json(const CostParams& p);
CostParams cost_params_from_json(const std::string& text);
CostParams load_cost_params(const std::string& path);

struct ResizeCost {
    Seconds spawn_time = 0.0;
    Seconds redist_time = 0.0;
    Seconds sync_duration = 0.0;
    Seconds async_duration = 0.0;
    double overlap_speedup = 1.0;
};

ResizeCost resize_cost(const MessagePlan& plan, const MamConfig& config, const CostParams& params);

/// Everything the engine needs to carry out one resize.
struct ReconfigPlan {
    MamConfig config;
    int ns = 0;
    int nt = 0;
    int spawned = 0;
    Seconds spawn_time = 0.0;
    Seconds redist_time = 0.0;
    Seconds sync_duration = 0.0;
    Seconds async_duration = 0.0;
    double overlap_speedup = 1.0;
    double memory_peak = 0.0;
    long long moved_slices = 0;

    /// Wall time the resize occupies under its own strategy.
    Seconds duration() const { return config.async ? async_duration : sync_duration; }
};

/// Plans an ns -> nt rank resize of a job with the given grid.
ReconfigPlan plan_resize(const GridDims& grid, int ns, int nt, const MamConfig& config,
                         const CostParams& params);

}  // namespace mallsim::reconfig
