#include "mallsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mallsim/format.hpp"

namespace mallsim::experiment {

using nlohmann::json;

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Static: return "Static";
        case Variant::Baseline: return "Baseline";
        case Variant::Merge: return "Merge";
        case Variant::BaselineAsync: return "BaselineAsync";
        case Variant::MergeAsync: return "MergeAsync";
    }
    return "?";
}

Variant variant_from_string(std::string_view s) {
    for (Variant v : kVariants)
        if (to_string(v) == s) return v;
    throw ConfigError("unknown variant '" + std::string(s) +
                      "' (Static|Baseline|Merge|BaselineAsync|MergeAsync)");
}

std::optional<reconfig::MamConfig> mam_config_for(Variant v, bool auto_select) {
    if (v == Variant::Static || auto_select) return std::nullopt;
    reconfig::MamConfig c;
    c.user_override = true;
    c.parallel = true;
    c.spawn_method = (v == Variant::Baseline || v == Variant::BaselineAsync)
                         ? reconfig::SpawnMethod::Baseline
                         : reconfig::SpawnMethod::Merge;
    c.async = v == Variant::BaselineAsync || v == Variant::MergeAsync;
    return c;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <class T>
T get_as(const json& obj, const char* key, const char* where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + ": wrong type");
    }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    check_keys(doc,
               {"cluster", "workload", "workload_path", "variant", "repetitions", "seeds",
                "cost_params", "profiles", "policy", "auto_select", "output_dir", "workers"},
               "config");
    RunConfig cfg;
    if (doc.contains("cluster")) {
        const auto& c = doc["cluster"];
        check_keys(c, {"nodes", "ranks_per_node"}, "cluster");
        if (c.contains("nodes")) cfg.nodes = get_as<int>(c, "nodes", "cluster");
        if (c.contains("ranks_per_node"))
            cfg.ranks_per_node = get_as<int>(c, "ranks_per_node", "cluster");
        if (cfg.nodes < 1 || cfg.ranks_per_node < 1)
            throw ConfigError("cluster: nodes and ranks_per_node must be >= 1");
    }
    if (doc.contains("workload")) {
        const auto& w = doc["workload"];
        check_keys(w, {"job_count", "type_weights", "mean_interarrival", "inhibit_window"},
                   "workload");
        if (w.contains("job_count")) cfg.workload.job_count = get_as<int>(w, "job_count", "workload");
        if (w.contains("mean_interarrival"))
            cfg.workload.mean_interarrival = get_as<double>(w, "mean_interarrival", "workload");
        if (w.contains("inhibit_window"))
            cfg.workload.inhibit_window = get_as<int>(w, "inhibit_window", "workload");
        if (w.contains("type_weights")) {
            cfg.workload.type_weights.clear();
            for (const auto& [name, weight] : w["type_weights"].items()) {
                JobType t;
                try {
                    t = job_type_from_string(name);
                } catch (const Error& e) {
                    throw ConfigError(std::string("workload.type_weights: ") + e.what());
                }
                if (!weight.is_number()) throw ConfigError("workload.type_weights: numbers expected");
                cfg.workload.type_weights[t] = weight.get<double>();
            }
        }
        try {
            cfg.workload.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("workload: ") + e.what());
        }
    }
    if (doc.contains("workload_path"))
        cfg.workload_path = resolve(base_dir, get_as<std::string>(doc, "workload_path", "config"));
    if (doc.contains("variant"))
        cfg.variant = variant_from_string(get_as<std::string>(doc, "variant", "config"));
    if (doc.contains("seeds")) {
        cfg.seeds = get_as<std::vector<std::uint64_t>>(doc, "seeds", "config");
        if (cfg.seeds.empty()) throw ConfigError("config.seeds: at least one seed required");
    }
    if (doc.contains("repetitions")) {
        const int reps = get_as<int>(doc, "repetitions", "config");
        if (reps < 1) throw ConfigError("config.repetitions must be >= 1");
        if (!doc.contains("seeds")) {
            cfg.seeds.clear();
            for (int i = 1; i <= reps; ++i) cfg.seeds.push_back(std::uint64_t(i));
        } else if (std::size_t(reps) != cfg.seeds.size()) {
            throw ConfigError("config: repetitions must equal the number of seeds");
        }
    }
    if (doc.contains("cost_params")) {
        cfg.cost_params_path = resolve(base_dir, get_as<std::string>(doc, "cost_params", "config"));
        try {
            cfg.costs = reconfig::load_cost_params(cfg.cost_params_path->string());
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (doc.contains("profiles")) {
        cfg.profiles_path = resolve(base_dir, get_as<std::string>(doc, "profiles", "config"));
        try {
            cfg.profiles = scalability::load_profiles(*cfg.profiles_path);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (doc.contains("policy")) {
        const auto& p = doc["policy"];
        check_keys(p, {"backfill", "start_size", "expansion"}, "policy");
        try {
            if (p.contains("backfill")) cfg.policy.backfill = get_as<bool>(p, "backfill", "policy");
            if (p.contains("start_size"))
                cfg.policy.start_size =
                    policy::start_size_rule_from_string(get_as<std::string>(p, "start_size", "policy"));
            if (p.contains("expansion"))
                cfg.policy.expansion =
                    policy::expansion_rule_from_string(get_as<std::string>(p, "expansion", "policy"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("policy: ") + e.what());
        }
    }
    if (doc.contains("auto_select")) cfg.auto_select = get_as<bool>(doc, "auto_select", "config");
    if (doc.contains("output_dir"))
        cfg.output_dir = resolve(base_dir, get_as<std::string>(doc, "output_dir", "config"));
    if (doc.contains("workers")) cfg.workers = get_as<int>(doc, "workers", "config");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

workload::Workload workload_for_seed(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.workload_path) return workload::load(*cfg.workload_path, cfg.workload.inhibit_window);
    workload::WorkloadSpec spec = cfg.workload;
    spec.seed = seed;
    spec.malleable = true;
    return workload::generate(spec, cfg.profiles);
}

engine::EngineConfig engine_config_for(const RunConfig& cfg, Variant v) {
    engine::EngineConfig e;
    e.total_nodes = cfg.nodes;
    e.ranks_per_node = cfg.ranks_per_node;
    e.policy = cfg.policy;
    e.mam_override = mam_config_for(v, cfg.auto_select);
    e.async_strategy = v == Variant::BaselineAsync || v == Variant::MergeAsync;
    e.costs = cfg.costs;
    e.profiles = cfg.profiles;
    return e;
}

RunResult run_variant(const RunConfig& cfg, const workload::Workload& malleable, Variant v,
                      std::uint64_t seed) {
    const workload::Workload w =
        v == Variant::Static ? workload::make_static(malleable, cfg.profiles) : malleable;
    RunResult r;
    r.variant = v;
    r.seed = seed;
    r.trace = engine::run(w, engine_config_for(cfg, v));
    r.report = metrics::compute(r.trace);
    return r;
}

std::vector<RunResult> run_matrix(const RunConfig& cfg, std::span<const Variant> variants) {
    std::vector<workload::Workload> workloads;
    for (auto seed : cfg.seeds) workloads.push_back(workload_for_seed(cfg, seed));

    const std::size_t n_seeds = cfg.seeds.size();
    const std::size_t total = variants.size() * n_seeds;
    std::vector<RunResult> results(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            try {
                const Variant v = variants[k / n_seeds];
                const std::size_t s = k % n_seeds;
                results[k] = run_variant(cfg, workloads[s], v, cfg.seeds[s]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::size_t n_workers = cfg.workers > 0 ? std::size_t(cfg.workers)
                                            : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min(n_workers, total);
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
    return results;
}

std::map<Variant, metrics::RunReport> summarize(std::span<const RunResult> runs) {
    std::map<Variant, std::vector<metrics::RunReport>> by_variant;
    for (const auto& r : runs) by_variant[r.variant].push_back(r.report);
    std::map<Variant, metrics::RunReport> out;
    for (const auto& [v, reports] : by_variant) out[v] = metrics::aggregate(reports);
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << contents;
    if (!out) throw Error("failed writing " + path.string());
}

double iteration_speedup(Variant v, const reconfig::CostParams& c) {
    switch (v) {
        case Variant::BaselineAsync: return c.is_baseline_async;
        case Variant::MergeAsync: return c.is_merge_async;
        default: return 1.0;
    }
}

}  // namespace

void write_run_outputs(const std::filesystem::path& dir, const RunResult& r) {
    std::filesystem::create_directories(dir);
    const std::string stem = std::string(to_string(r.variant)) + "_seed" + std::to_string(r.seed);
    std::ostringstream jobs, util, eps, log;
    metrics::write_jobs_csv(jobs, r.trace);
    metrics::write_utilization_csv(util, r.report);
    metrics::write_episodes_csv(eps, r.trace);
    engine::write_trace_log(log, r.trace);
    write_file(dir / (stem + "_jobs.csv"), jobs.str());
    write_file(dir / (stem + "_utilization.csv"), util.str());
    write_file(dir / (stem + "_resizes.csv"), eps.str());
    write_file(dir / (stem + "_trace.csv"), log.str());

    const auto& rep = r.report;
    std::ostringstream summary;
    summary << "{\n  \"variant\": \"" << to_string(r.variant) << "\",\n  \"seed\": " << r.seed
            << ",\n  \"makespan\": " << format_double(rep.makespan)
            << ",\n  \"mean_utilization\": " << format_double(rep.mean_utilization)
            << ",\n  \"accumulated_resize\": " << format_double(rep.accumulated_resize)
            << ",\n  \"resize_count\": " << rep.resize_count
            << ",\n  \"overlapped_iterations\": " << rep.overlapped_iterations
            << ",\n  \"median_resize\": " << format_double(rep.median_resize)
            << ",\n  \"queue_empty_time\": " << format_double(rep.queue_empty_time)
            << ",\n  \"all_submitted_time\": " << format_double(rep.all_submitted_time) << "\n}\n";
    write_file(dir / (stem + "_summary.json"), summary.str());
}

void write_summary(const std::filesystem::path& dir,
                   const std::map<Variant, metrics::RunReport>& summary,
                   const reconfig::CostParams& costs) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "experiment,makespan,utilization,accumulated_resize_time,overlapped_iterations,"
           "iteration_speedup,median_resize_time,median_spawn_time,median_redistribution_time,"
           "resize_count,queue_empty_time";
    for (JobType t : kJobTypes) {
        const std::string n(to_string(t));
        csv << ',' << n << "_wait," << n << "_run," << n << "_turnaround";
    }
    csv << '\n';
    for (const auto& [v, r] : summary) {
        csv << to_string(v) << ',' << format_double(r.makespan) << ','
            << format_double(r.mean_utilization) << ',' << format_double(r.accumulated_resize) << ','
            << r.overlapped_iterations << ',' << format_double(iteration_speedup(v, costs)) << ','
            << format_double(r.median_resize) << ',' << format_double(r.median_spawn) << ','
            << format_double(r.median_redistribution) << ',' << r.resize_count << ','
            << format_double(r.queue_empty_time);
        for (JobType t : kJobTypes) {
            auto it = r.per_type.find(t);
            const metrics::TypeMedians m = it == r.per_type.end() ? metrics::TypeMedians{} : it->second;
            csv << ',' << format_double(m.wait) << ',' << format_double(m.run) << ','
                << format_double(m.turnaround);
        }
        csv << '\n';
    }
    write_file(dir / "summary.csv", csv.str());

    for (const auto& [v, r] : summary) {
        std::ostringstream util;
        metrics::write_utilization_csv(util, r);
        write_file(dir / (std::string(to_string(v)) + "_median_utilization.csv"), util.str());
    }
}

}  // namespace mallsim::experiment
