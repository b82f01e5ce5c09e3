#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mallsim/experiment.hpp"

using namespace mallsim;
using namespace mallsim::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("variant names") {
    for (auto v : kVariants) CHECK(variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(variant_from_string("Elastic"), ConfigError);
    CHECK_FALSE(mam_config_for(Variant::Static));
    CHECK(mam_config_for(Variant::MergeAsync)->async);
    CHECK(mam_config_for(Variant::BaselineAsync)->spawn_method == reconfig::SpawnMethod::Baseline);
    CHECK_FALSE(mam_config_for(Variant::Merge, true));
}

TEST_CASE("auto selection keeps the async flag") {
    RunConfig cfg;
    cfg.auto_select = true;
    const auto e = engine_config_for(cfg, Variant::BaselineAsync);
    CHECK_FALSE(e.mam_override);
    CHECK(e.async_strategy);
    CHECK_FALSE(engine_config_for(cfg, Variant::Merge).async_strategy);
}

TEST_CASE("default config") {
    const auto cfg = parse_run_config("{}");
    CHECK(cfg.nodes == 31);
    CHECK(cfg.ranks_per_node == 112);
    CHECK(cfg.workload.job_count == 30);
    CHECK(cfg.workload.mean_interarrival == 10.0);
    CHECK(cfg.workload.inhibit_window == 4);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("shipped config") {
    const auto cfg = load_run_config(fs::path(MALLSIM_CONFIG_DIR) / "default.json");
    CHECK(cfg.seeds.size() == 5);
    CHECK(cfg.costs == reconfig::load_cost_params(fs::path(MALLSIM_CONFIG_DIR) / "cost_params.json"));
    CHECK(cfg.policy.backfill);
}

TEST_CASE("config fields") {
    const auto cfg = parse_run_config(R"({
        "cluster": {"nodes": 12, "ranks_per_node": 4},
        "workload": {"job_count": 7, "type_weights": {"Large": 1}, "mean_interarrival": 3, "inhibit_window": 2},
        "variant": "MergeAsync",
        "repetitions": 2,
        "seeds": [9, 11],
        "policy": {"backfill": false, "start_size": "minimum", "expansion": "single"},
        "auto_select": true,
        "output_dir": "results",
        "workers": 2
    })", "/base");
    CHECK(cfg.nodes == 12);
    CHECK(cfg.ranks_per_node == 4);
    CHECK(cfg.workload.job_count == 7);
    CHECK(cfg.workload.type_weights.size() == 1);
    CHECK(cfg.variant == Variant::MergeAsync);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{9, 11});
    CHECK_FALSE(cfg.policy.backfill);
    CHECK(cfg.policy.start_size == policy::StartSizeRule::Minimum);
    CHECK(cfg.policy.expansion == policy::ExpansionRule::SingleNode);
    CHECK(cfg.auto_select);
    CHECK(cfg.output_dir == fs::path("/base/results"));
    CHECK(cfg.workers == 2);

    CHECK(parse_run_config(R"({"repetitions": 3})").seeds == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"colour": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"repetitions": 2, "seeds": [1]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"variant": "Fast"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"cluster": {"nodes": "many"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"workload": {"job_count": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"cost_params": "no/such/file.json"})"), Error);
    CHECK_THROWS_AS(load_run_config("no/such/config.json"), Error);
}

TEST_CASE("dynamic variants share a workload; static is its rigid copy") {
    RunConfig cfg;
    const auto w = workload_for_seed(cfg, 2);
    CHECK(w == workload_for_seed(cfg, 2));
    const auto s = run_variant(cfg, w, Variant::Static, 2);
    const auto b = run_variant(cfg, w, Variant::Baseline, 2);
    REQUIRE(s.trace.jobs.size() == b.trace.jobs.size());
    for (std::size_t i = 0; i < w.jobs.size(); ++i) {
        CHECK(s.trace.jobs[i].spec.submit_time == b.trace.jobs[i].spec.submit_time);
        CHECK(s.trace.jobs[i].spec.jtype == b.trace.jobs[i].spec.jtype);
        CHECK_FALSE(s.trace.jobs[i].spec.malleable);
        CHECK(b.trace.jobs[i].spec.malleable);
    }
}

TEST_CASE("matrix order and worker independence") {
    RunConfig cfg;
    cfg.seeds = {3, 1, 2};
    const Variant vs[] = {Variant::Merge, Variant::Static};
    cfg.workers = 1;
    const auto one = run_matrix(cfg, vs);
    cfg.workers = 4;
    const auto four = run_matrix(cfg, vs);
    REQUIRE(one.size() == 6);
    REQUIRE(four.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(one[i].variant == vs[i / 3]);
        CHECK(one[i].seed == cfg.seeds[i % 3]);
        CHECK(one[i].variant == four[i].variant);
        CHECK(one[i].seed == four[i].seed);
        CHECK(one[i].report == four[i].report);
    }
    const auto summary = summarize(four);
    CHECK(summary.size() == 2);
}

TEST_CASE("loaded workloads are used as given") {
    const fs::path dir = fs::path(MALLSIM_TEST_TMP) / "loaded";
    fs::create_directories(dir);
    workload::WorkloadSpec ws;
    ws.job_count = 5;
    ws.seed = 77;
    const auto w = workload::generate(ws);
    workload::save(w, dir / "w.json");
    RunConfig cfg;
    cfg.workload_path = dir / "w.json";
    CHECK(workload_for_seed(cfg, 1) == w);
    CHECK(workload_for_seed(cfg, 2) == w);
}

TEST_CASE("output files") {
    const fs::path dir = fs::path(MALLSIM_TEST_TMP) / "outputs";
    fs::remove_all(dir);
    RunConfig cfg;
    cfg.seeds = {1, 2};
    const auto runs = run_matrix(cfg, kVariants);
    for (const auto& r : runs) write_run_outputs(dir / "runs", r);
    write_summary(dir, summarize(runs), cfg.costs);
    for (const char* suffix : {"jobs", "utilization", "resizes", "trace"})
        CHECK(fs::exists(dir / "runs" / (std::string("MergeAsync_seed2_") + suffix + ".csv")));
    CHECK(fs::exists(dir / "runs" / "Static_seed1_summary.json"));
    CHECK(fs::exists(dir / "Baseline_median_utilization.csv"));
    const auto summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("experiment,makespan,utilization,accumulated_resize_time", 0) == 0);
    int lines = 0;
    for (char c : summary) lines += c == '\n';
    CHECK(lines == 6);
}
