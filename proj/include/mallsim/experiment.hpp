#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mallsim/engine.hpp"
#include "mallsim/metrics.hpp"

namespace mallsim::experiment {

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Variant { Static, Baseline, Merge, BaselineAsync, MergeAsync };

inline constexpr Variant kVariants[] = {Variant::Static, Variant::Baseline, Variant::Merge,
                                        Variant::BaselineAsync, Variant::MergeAsync};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);  // throws ConfigError

/// Engine override for a variant. Static has none; with `auto_select` the
/// dynamic variants keep only their async flag and let the engine choose the method.
std::optional<reconfig::MamConfig> mam_config_for(Variant v, bool auto_select = false);

struct RunConfig {
    int nodes = 31;
    int ranks_per_node = 112;
    workload::WorkloadSpec workload;
    std::optional<std::filesystem::path> workload_path;
    Variant variant = Variant::Baseline;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::optional<std::filesystem::path> cost_params_path;
    reconfig::CostParams costs;
    std::optional<std::filesystem::path> profiles_path;
    scalability::ProfileSet profiles = scalability::default_profiles();
    policy::PolicyConfig policy;
    bool auto_select = false;
    std::filesystem::path output_dir = "out";
    int workers = 0;  // 0: one per hardware thread
};

/// Parses a run manifest; relative paths resolve against `base_dir`.
/// Referenced cost and profile files are loaded eagerly.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Malleable flavour of the workload for a seed (generated or loaded).
workload::Workload workload_for_seed(const RunConfig& cfg, std::uint64_t seed);

engine::EngineConfig engine_config_for(const RunConfig& cfg, Variant v);

struct RunResult {
    Variant variant = Variant::Static;
    std::uint64_t seed = 0;
    engine::SimulationTrace trace;
    metrics::RunReport report;
};

/// Runs one variant; Static rigidifies the workload first.
RunResult run_variant(const RunConfig& cfg, const workload::Workload& malleable, Variant v,
                      std::uint64_t seed);

/// Every (variant, seed) pair, fanned out over worker threads. Results come
/// back variant-major in the order requested, independent of scheduling.
std::vector<RunResult> run_matrix(const RunConfig& cfg, std::span<const Variant> variants);

/// Element-wise medians per variant.
std::map<Variant, metrics::RunReport> summarize(std::span<const RunResult> runs);

/// Per-run CSVs and trace log under `dir`, named by variant and seed.
void write_run_outputs(const std::filesystem::path& dir, const RunResult& r);
void write_summary(const std::filesystem::path& dir,
                   const std::map<Variant, metrics::RunReport>& summary,
                   const reconfig::CostParams& costs);

}  // namespace mallsim::experiment
