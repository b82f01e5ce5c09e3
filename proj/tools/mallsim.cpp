// mallsim: command-line driver for the malleable-workload simulator.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mallsim/calibration.hpp"
#include "mallsim/experiment.hpp"
#include "mallsim/format.hpp"

namespace fs = std::filesystem;
using namespace mallsim;

namespace {

constexpr int kSimulationError = 1;
constexpr int kUsageError = 2;
constexpr const char* kOutEnv = "MALLSIM_OUTPUT_DIR";

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string variant;
    std::string out;
    int workers = 0;
    int max_iterations = 400;
};

/// Thrown for problems with the invocation rather than the simulation.
struct UsageError : Error {
    using Error::Error;
};

experiment::RunConfig resolve_config(const Options& opt) {
    experiment::RunConfig cfg;
    try {
        if (!opt.config.empty()) {
            if (!fs::exists(opt.config)) throw UsageError("config file not found: " + opt.config);
            cfg = experiment::load_run_config(opt.config);
        }
        if (opt.seed) cfg.seeds = {*opt.seed};
        if (!opt.variant.empty()) cfg.variant = experiment::variant_from_string(opt.variant);
    } catch (const experiment::ConfigError& e) {
        throw UsageError(e.what());
    }
    if (const char* env = std::getenv(kOutEnv); env && *env) cfg.output_dir = env;
    if (!opt.out.empty()) cfg.output_dir = opt.out;
    if (opt.workers > 0) cfg.workers = opt.workers;
    if (cfg.workload_path && !fs::exists(*cfg.workload_path))
        throw UsageError("workload file not found: " + cfg.workload_path->string());
    return cfg;
}

void print_summary(const std::map<experiment::Variant, metrics::RunReport>& summary) {
    std::cout << "experiment,makespan,utilization,accumulated_resize,overlapped_iterations\n";
    for (const auto& [v, r] : summary) {
        std::cout << experiment::to_string(v) << ',' << format_double(r.makespan) << ','
                  << format_double(r.mean_utilization) << ',' << format_double(r.accumulated_resize)
                  << ',' << r.overlapped_iterations << '\n';
    }
}

int cmd_generate(const Options& opt) {
    const auto cfg = resolve_config(opt);
    fs::create_directories(cfg.output_dir);
    for (auto seed : cfg.seeds) {
        const auto w = experiment::workload_for_seed(cfg, seed);
        const fs::path path = cfg.output_dir / ("workload_seed" + std::to_string(seed) + ".json");
        workload::save(w, path);
        std::cout << path.string() << '\n';
    }
    return 0;
}

int cmd_run(const Options& opt, bool all_variants) {
    const auto cfg = resolve_config(opt);
    std::vector<experiment::Variant> variants;
    if (all_variants)
        variants.assign(std::begin(experiment::kVariants), std::end(experiment::kVariants));
    else
        variants.push_back(cfg.variant);
    const auto runs = experiment::run_matrix(cfg, variants);
    for (const auto& r : runs) experiment::write_run_outputs(cfg.output_dir / "runs", r);
    const auto summary = experiment::summarize(runs);
    experiment::write_summary(cfg.output_dir, summary, cfg.costs);
    print_summary(summary);
    return 0;
}

int cmd_calibrate(const Options& opt) {
    const auto cfg = resolve_config(opt);
    const auto result = calibration::calibrate(cfg, {}, opt.max_iterations);
    fs::create_directories(cfg.output_dir);
    const fs::path path = cfg.output_dir / "cost_params.json";
    {
        std::ofstream out(path);
        out << reconfig::to_json(result.params);
        if (!out) throw Error("failed writing " + path.string());
    }
    std::cout << "baseline_accumulated," << format_double(result.outcome.baseline_accumulated)
              << "\nmerge_accumulated," << format_double(result.outcome.merge_accumulated)
              << "\nresize_speedup," << format_double(result.outcome.resize_speedup)
              << "\nloss," << format_double(result.loss) << "\niterations," << result.iterations
              << "\nconverged," << (result.converged ? "yes" : "no") << '\n'
              << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator of static and malleable HPC workloads"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config, "Run manifest (JSON)");
        sub->add_option("--seed", opt.seed, "Use this single seed instead of the manifest's list");
        sub->add_option("--out", opt.out, std::string("Output directory (overrides ") + kOutEnv + ")");
        sub->add_option("--workers", opt.workers, "Parallel repetitions (0: hardware threads)");
    };
    auto* gen = app.add_subcommand("generate", "Write the workload file for each seed");
    add_common(gen);
    auto* run = app.add_subcommand("run", "Run one variant over the configured seeds");
    add_common(run);
    run->add_option("--variant", opt.variant, "Static|Baseline|Merge|BaselineAsync|MergeAsync");
    auto* exp = app.add_subcommand("experiment", "Run all five variants and aggregate");
    add_common(exp);
    auto* cal = app.add_subcommand("calibrate", "Fit resize cost parameters");
    add_common(cal);
    cal->add_option("--max-iterations", opt.max_iterations, "Simplex iteration cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (gen->parsed()) return cmd_generate(opt);
        if (run->parsed()) return cmd_run(opt, false);
        if (exp->parsed()) return cmd_run(opt, true);
        if (cal->parsed()) return cmd_calibrate(opt);
    } catch (const UsageError& e) {
        std::cerr << "mallsim: " << e.what() << '\n';
        return kUsageError;
    } catch (const workload::MalformedFile& e) {
        std::cerr << "mallsim: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "mallsim: " << e.what() << '\n';
        return kSimulationError;
    }
    return kUsageError;
}
