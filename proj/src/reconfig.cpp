#include "mallsim/reconfig.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mallsim::reconfig {

std::string_view to_string(SpawnMethod m) {
    return m == SpawnMethod::Baseline ? "Baseline" : "Merge";
}

MamConfig choose_config(int ns, int nt, int original_ranks,
                        const std::optional<MamConfig>& override_config) {
    if (ns < 1 || nt < 1 || original_ranks < 1) throw Error("choose_config: rank counts must be >= 1");
    if (override_config) return *override_config;

    MamConfig cfg;
    cfg.parallel = true;
    cfg.redist_method = RedistMethod::Collective;
    if (nt > ns) {
        cfg.spawn_method = SpawnMethod::Merge;
    } else if (nt < original_ranks) {
        cfg.spawn_method = SpawnMethod::Baseline;
        cfg.intracomm = true;
    } else {
        cfg.spawn_method = SpawnMethod::Merge;
    }
    return cfg;
}

int spawn_count(SpawnMethod method, int ns, int nt) {
    if (ns < 1 || nt < 1) throw Error("spawn_count: rank counts must be >= 1");
    return method == SpawnMethod::Baseline ? nt : std::max(0, nt - ns);
}

double memory_required(SpawnMethod method, double problem_size, int ns, int nt, double constant) {
    if (ns < 1 || nt < 1) throw Error("memory_required: rank counts must be >= 1");
    if (method == SpawnMethod::Baseline) return problem_size / ns + problem_size / nt + constant;
    return problem_size / std::min(ns, nt) + constant;
}

Block block_distribution(int n_dim, int size, int rank) {
    if (size < 1) throw InvalidRank("block_distribution: size must be >= 1");
    if (rank < 0 || rank >= size)
        throw InvalidRank("block_distribution: rank " + std::to_string(rank) + " outside [0, " +
                          std::to_string(size) + ")");
    if (n_dim < size)
        throw UndersizedDimension("block_distribution: " + std::to_string(n_dim) +
                                  " planes cannot feed " + std::to_string(size) + " ranks");
    const int exp_qty = n_dim / size;
    const int rem = n_dim % size;
    Block b;
    if (rank < rem) {
        b.ini = rank * exp_qty + rank;
        b.end = b.ini + exp_qty + 1;
    } else {
        b.ini = rank * exp_qty + rem;
        b.end = b.ini + exp_qty;
    }
    b.n = b.end - b.ini;
    return b;
}

long long MessagePlan::moved_slices() const {
    long long moved = 0;
    for (const auto& t : transfers)
        if (t.source != t.target) moved += t.slices;
    return moved;
}

MessagePlan redistribution_plan(int n_dim, double slice_volume, int ns, int nt, int array_count) {
    if (ns < 1 || nt < 1) throw InvalidRank("redistribution_plan: rank counts must be >= 1");
    if (n_dim < std::max(ns, nt))
        throw UndersizedDimension("redistribution_plan: dimension smaller than rank count");
    MessagePlan plan{n_dim, ns, nt, slice_volume, array_count, {}};
    plan.transfers.reserve(std::size_t(ns) + std::size_t(nt));

    // Both block maps are ordered along N, so one sweep pairs every overlap.
    int s = 0, t = 0;
    Block sb = block_distribution(n_dim, ns, 0);
    Block tb = block_distribution(n_dim, nt, 0);
    while (s < ns && t < nt) {
        const int lo = std::max(sb.ini, tb.ini);
        const int hi = std::min(sb.end, tb.end);
        if (hi > lo) plan.transfers.push_back({s, t, hi - lo});
        const int source_end = sb.end;
        const int target_end = tb.end;
        if (source_end <= target_end && ++s < ns) sb = block_distribution(n_dim, ns, s);
        if (target_end <= source_end && ++t < nt) tb = block_distribution(n_dim, nt, t);
    }
    return plan;
}

void CostParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw Error(std::string("cost params: ") + name + " must be positive");
    };
    positive(spawn_fixed, "spawn_fixed");
    positive(spawn_per_rank, "spawn_per_rank");
    positive(redist_bandwidth, "redist_bandwidth");
    if (!(mam_constant_c >= 0.0)) throw Error("cost params: mam_constant_c must be >= 0");
    for (auto [v, name] : {std::pair{async_resize_factor_baseline, "async_resize_factor_baseline"},
                           std::pair{async_resize_factor_merge, "async_resize_factor_merge"},
                           std::pair{is_baseline_async, "is_baseline_async"},
                           std::pair{is_merge_async, "is_merge_async"}}) {
        if (!(v > 0.0 && v <= 1.0))
            throw Error(std::string("cost params: ") + name + " must lie in (0, 1]");
    }
}

std::string to_json(const CostParams& p) {
    nlohmann::ordered_json j{{"spawn_fixed", p.spawn_fixed},
                             {"spawn_per_rank", p.spawn_per_rank},
                             {"redist_bandwidth", p.redist_bandwidth},
                             {"mam_constant_c", p.mam_constant_c},
                             {"async_resize_factor_baseline", p.async_resize_factor_baseline},
                             {"async_resize_factor_merge", p.async_resize_factor_merge},
                             {"is_baseline_async", p.is_baseline_async},
                             {"is_merge_async", p.is_merge_async}};
    return j.dump(2) + "\n";
}

CostParams cost_params_from_json(const std::string& text) {
    CostParams p;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("cost params: ") + e.what());
    }
    if (!j.is_object()) throw Error("cost params: expected an object");
    auto read = [&j](const char* key, double& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw Error(std::string("cost params: ") + key + " must be a number");
        field = j[key].get<double>();
    };
    read("spawn_fixed", p.spawn_fixed);
    read("spawn_per_rank", p.spawn_per_rank);
    read("redist_bandwidth", p.redist_bandwidth);
    read("mam_constant_c", p.mam_constant_c);
    read("async_resize_factor_baseline", p.async_resize_factor_baseline);
    read("async_resize_factor_merge", p.async_resize_factor_merge);
    read("is_baseline_async", p.is_baseline_async);
    read("is_merge_async", p.is_merge_async);
    p.validate();
    return p;
}

CostParams load_cost_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open cost params " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return cost_params_from_json(buf.str());
}

ResizeCost resize_cost(const MessagePlan& plan, const MamConfig& config, const CostParams& params) {
    const bool baseline = config.spawn_method == SpawnMethod::Baseline;
    ResizeCost c;
    c.spawn_time = params.spawn_fixed +
                   params.spawn_per_rank * spawn_count(config.spawn_method, plan.ns, plan.nt);
    c.redist_time = plan.moved_volume() / params.redist_bandwidth;
    c.sync_duration = c.spawn_time + c.redist_time;
    c.async_duration = c.sync_duration / (baseline ? params.async_resize_factor_baseline
                                                   : params.async_resize_factor_merge);
    c.overlap_speedup =
        config.async ? (baseline ? params.is_baseline_async : params.is_merge_async) : 1.0;
    return c;
}

ReconfigPlan plan_resize(const GridDims& grid, int ns, int nt, const MamConfig& config,
                         const CostParams& params) {
    const MessagePlan msgs = redistribution_plan(grid.n, grid.slice_volume(), ns, nt);
    const ResizeCost cost = resize_cost(msgs, config, params);
    ReconfigPlan p;
    p.config = config;
    p.ns = ns;
    p.nt = nt;
    p.spawned = spawn_count(config.spawn_method, ns, nt);
    p.spawn_time = cost.spawn_time;
    p.redist_time = cost.redist_time;
    p.sync_duration = cost.sync_duration;
    p.async_duration = cost.async_duration;
    p.overlap_speedup = cost.overlap_speedup;
    p.memory_peak = memory_required(config.spawn_method,
                                    double(grid.n) * grid.slice_volume() * msgs.array_count, ns, nt,
                                    params.mam_constant_c);
    p.moved_slices = msgs.moved_slices();
    return p;
}

}  // namespace mallsim::reconfig
