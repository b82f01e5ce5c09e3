#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mallsim/calibration.hpp"
#include "mallsim/experiment.hpp"

namespace py = pybind11;
using namespace mallsim;

namespace {

py::dict report_dict(const metrics::RunReport& r) {
    py::dict per_type;
    for (const auto& [t, m] : r.per_type) {
        py::dict d;
        d["jobs"] = m.jobs;
        d["wait"] = m.wait;
        d["run"] = m.run;
        d["turnaround"] = m.turnaround;
        per_type[py::str(std::string(to_string(t)))] = d;
    }
    py::dict d;
    d["makespan"] = r.makespan;
    d["mean_utilization"] = r.mean_utilization;
    d["accumulated_resize"] = r.accumulated_resize;
    d["resize_count"] = r.resize_count;
    d["overlapped_iterations"] = r.overlapped_iterations;
    d["median_resize"] = r.median_resize;
    d["median_spawn"] = r.median_spawn;
    d["median_redistribution"] = r.median_redistribution;
    d["queue_empty_time"] = r.queue_empty_time;
    d["all_submitted_time"] = r.all_submitted_time;
    d["utilization_series"] = r.utilization_series;
    d["per_type"] = per_type;
    return d;
}

py::dict config_dict(const reconfig::MamConfig& c) {
    py::dict d;
    d["spawn_method"] = std::string(reconfig::to_string(c.spawn_method));
    d["parallel"] = c.parallel;
    d["intracomm"] = c.intracomm;
    d["async"] = c.async;
    return d;
}

reconfig::SpawnMethod method_from(const std::string& s) {
    if (s == "Baseline") return reconfig::SpawnMethod::Baseline;
    if (s == "Merge") return reconfig::SpawnMethod::Merge;
    throw Error("unknown spawn method: " + s);
}

experiment::RunConfig config_from(const std::optional<std::filesystem::path>& path) {
    return path ? experiment::load_run_config(*path) : experiment::RunConfig{};
}

const scalability::ScalabilityProfile& profile(const std::string& jtype) {
    return scalability::default_profiles().at(job_type_from_string(jtype));
}

}  // namespace

PYBIND11_MODULE(_mallsim, m) {
    m.doc() = "Discrete-event simulator of static and malleable HPC workloads";

    static py::exception<Error> base(m, "MallsimError");
    py::register_exception<experiment::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<workload::MalformedFile>(m, "MalformedFile", base.ptr());
    py::register_exception<InfeasibleAllocation>(m, "InfeasibleAllocation", base.ptr());
    py::register_exception<scalability::BelowMinimum>(m, "BelowMinimum", base.ptr());
    py::register_exception<reconfig::InvalidRank>(m, "InvalidRank", base.ptr());
    py::register_exception<reconfig::UndersizedDimension>(m, "UndersizedDimension", base.ptr());

    m.def("iteration_time", [](const std::string& t, int n) { return scalability::iteration_time(profile(t), n); },
          py::arg("jtype"), py::arg("nodes"));
    m.def("speedup", [](const std::string& t, int n) { return scalability::speedup(profile(t), n); },
          py::arg("jtype"), py::arg("nodes"));
    m.def("efficiency", [](const std::string& t, int n) { return scalability::efficiency(profile(t), n); },
          py::arg("jtype"), py::arg("nodes"));
    m.def("static_max_nodes", [](const std::string& t) { return scalability::static_max_nodes(profile(t)); },
          py::arg("jtype"));

    m.def("block_distribution",
          [](int n_dim, int size, int rank) {
              const auto b = reconfig::block_distribution(n_dim, size, rank);
              return py::make_tuple(b.ini, b.end, b.n);
          },
          py::arg("n_dim"), py::arg("size"), py::arg("rank"));
    m.def("redistribution_plan",
          [](int n_dim, int ns, int nt) {
              std::vector<std::tuple<int, int, int>> out;
              for (const auto& t : reconfig::redistribution_plan(n_dim, 1.0, ns, nt).transfers)
                  out.emplace_back(t.source, t.target, t.slices);
              return out;
          },
          py::arg("n_dim"), py::arg("ns"), py::arg("nt"));
    m.def("memory_required",
          [](const std::string& method, double ps, int ns, int nt, double c) {
              return reconfig::memory_required(method_from(method), ps, ns, nt, c);
          },
          py::arg("method"), py::arg("problem_size"), py::arg("ns"), py::arg("nt"), py::arg("c") = 0.0);
    m.def("choose_config",
          [](int ns, int nt, int original) { return config_dict(reconfig::choose_config(ns, nt, original)); },
          py::arg("ns"), py::arg("nt"), py::arg("original_ranks"));

    m.def("generate_workload",
          [](std::uint64_t seed, int job_count, double mean_interarrival, bool malleable) {
              workload::WorkloadSpec s;
              s.seed = seed;
              s.job_count = job_count;
              s.mean_interarrival = mean_interarrival;
              s.malleable = malleable;
              return workload::to_json(workload::generate(s));
          },
          py::arg("seed") = 1, py::arg("job_count") = 30, py::arg("mean_interarrival") = 10.0,
          py::arg("malleable") = true, "Workload as a JSON document.");

    m.def("run",
          [](const std::string& variant, std::uint64_t seed, std::optional<std::filesystem::path> config,
             std::optional<std::string> workload_json) {
              const auto cfg = config_from(config);
              const auto w = workload_json ? workload::from_json(*workload_json, cfg.workload.inhibit_window)
                                           : experiment::workload_for_seed(cfg, seed);
              experiment::RunResult r;
              {
                  py::gil_scoped_release release;
                  r = experiment::run_variant(cfg, w, experiment::variant_from_string(variant), seed);
              }
              return report_dict(r.report);
          },
          py::arg("variant") = "Baseline", py::arg("seed") = 1, py::arg("config") = py::none(),
          py::arg("workload") = py::none(), "Report of one simulated run.");

    m.def("experiment",
          [](std::optional<std::filesystem::path> config, std::optional<std::vector<std::uint64_t>> seeds) {
              auto cfg = config_from(config);
              if (seeds) cfg.seeds = *seeds;
              std::map<experiment::Variant, metrics::RunReport> summary;
              {
                  py::gil_scoped_release release;
                  summary = experiment::summarize(experiment::run_matrix(cfg, experiment::kVariants));
              }
              py::dict out;
              for (const auto& [v, r] : summary) out[py::str(std::string(experiment::to_string(v)))] = report_dict(r);
              return out;
          },
          py::arg("config") = py::none(), py::arg("seeds") = py::none(),
          "Median reports of all five variants.");

    m.def("calibrate",
          [](std::optional<std::filesystem::path> config, int max_iterations) {
              const auto cfg = config_from(config);
              calibration::Result r;
              {
                  py::gil_scoped_release release;
                  r = calibration::calibrate(cfg, {}, max_iterations);
              }
              py::dict d;
              d["params"] = reconfig::to_json(r.params);
              d["baseline_accumulated"] = r.outcome.baseline_accumulated;
              d["merge_accumulated"] = r.outcome.merge_accumulated;
              d["resize_speedup"] = r.outcome.resize_speedup;
              d["loss"] = r.loss;
              d["converged"] = r.converged;
              return d;
          },
          py::arg("config") = py::none(), py::arg("max_iterations") = 400);
}
