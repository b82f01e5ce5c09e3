#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mallsim/engine.hpp"
#include "mallsim/experiment.hpp"

using namespace mallsim;
using namespace mallsim::engine;

namespace {

JobSpec job(JobId id, JobType t, int iters, int lo, int hi, bool malleable, Seconds submit) {
    return JobSpec{id, t, iters, lo, hi, malleable, submit, 4};
}

reconfig::CostParams fixed_cost(Seconds spawn) {
    reconfig::CostParams c;
    c.spawn_fixed = spawn;
    c.spawn_per_rank = 1e-15;
    c.redist_bandwidth = 1e30;
    return c;
}

reconfig::MamConfig forced(reconfig::SpawnMethod m, bool async) {
    reconfig::MamConfig c;
    c.spawn_method = m;
    c.async = async;
    c.user_override = true;
    return c;
}

std::vector<TraceRecord> records_of(const SimulationTrace& t, JobId id, RecordKind k) {
    std::vector<TraceRecord> out;
    for (const auto& r : t.records)
        if (r.job == id && r.kind == k) out.push_back(r);
    return out;
}

// Three jobs on five nodes; times by hand from the iteration table.
//   1: rigid Large on 4 nodes at t=0, 1 iteration of 12.20
//   2: malleable Small at t=1 gets the last node, iterations of 8.90
//   3: rigid Small on 2 nodes at t=2, waits for job 1, 3 iterations of 3.40
// Job 2 finds a full cluster at 9.9; at 18.8 the queue is empty and two
// nodes are idle, so it grows to 3 with a 1 s resize and runs its last
// iteration in 2.20: done at 22.0.
workload::Workload hand_workload() {
    return {{job(1, JobType::Large, 1, 4, 4, false, 0.0),
             job(2, JobType::Small, 3, 1, 8, true, 1.0),
             job(3, JobType::Small, 3, 2, 2, false, 2.0)}};
}

EngineConfig hand_config() {
    EngineConfig c;
    c.total_nodes = 5;
    c.ranks_per_node = 1;
    c.mam_override = forced(reconfig::SpawnMethod::Merge, false);
    c.costs = fixed_cost(1.0);
    return c;
}

}  // namespace

TEST_CASE("hand timeline") {
    Simulation sim(hand_workload(), hand_config());
    sim.run_to_end();
    const auto& js = sim.jobs();
    CHECK(std::abs(js[0].wait_time) < 1e-9);
    CHECK(std::abs(js[0].run_time - 12.2) < 1e-9);
    CHECK(std::abs(js[1].wait_time) < 1e-9);
    CHECK(std::abs(js[1].run_time - 21.0) < 1e-9);
    CHECK(std::abs(js[2].wait_time - 10.2) < 1e-9);
    CHECK(std::abs(js[2].run_time - 10.2) < 1e-9);

    const auto& tr = sim.trace();
    REQUIRE(tr.episodes.size() == 1);
    CHECK(tr.episodes[0].nodes_before == 1);
    CHECK(tr.episodes[0].nodes_after == 3);
    CHECK(tr.episodes[0].job == 2);
    CHECK(std::abs(tr.episodes[0].t_start - 18.8) < 1e-9);
    CHECK(std::abs(tr.episodes[0].t_end - 19.8) < 1e-9);
}

TEST_CASE("step replay equals run") {
    const auto whole = run(hand_workload(), hand_config());
    Simulation sim(hand_workload(), hand_config());
    Seconds last = 0.0;
    while (sim.has_events()) {
        const auto ev = sim.step();
        CHECK(ev.time >= last);
        last = ev.time;
    }
    CHECK(sim.trace().records == whole.records);
    CHECK(sim.trace().snapshots == whole.snapshots);
    CHECK(sim.trace().episodes.size() == whole.episodes.size());
    CHECK_THROWS_AS(sim.step(), EmptyQueue);
}

TEST_CASE("static small job on one node") {
    EngineConfig c;
    const auto t = run({{job(1, JobType::Small, 20, 1, 1, false, 0.0)}}, c);
    CHECK(t.jobs[0].end - t.jobs[0].start == doctest::Approx(178.0));
    CHECK(t.episodes.empty());
}

TEST_CASE("lone malleable job grows at its first sync point") {
    EngineConfig c;
    c.costs = fixed_cost(0.5);
    const workload::Workload w{{job(1, JobType::Small, 20, 1, 8, true, 0.0)}};
    // The default start rule already hands it its maximum.
    auto t = run(w, c);
    CHECK(t.jobs[0].start == 0.0);
    CHECK(t.snapshots.front().nodes.at(1) == 8);
    CHECK(t.episodes.empty());

    c.policy.start_size = policy::StartSizeRule::Minimum;
    t = run(w, c);
    REQUIRE(t.episodes.size() == 1);
    CHECK(t.episodes[0].t_start == doctest::Approx(8.9));
    CHECK(t.episodes[0].nodes_before == 1);
    CHECK(t.episodes[0].nodes_after == 8);
}

TEST_CASE("async resize spans k dilated iterations") {
    // Job 2 (rigid Medium, 2 nodes, 5 x 8.70) ends at 43.5; job 1 on the
    // remaining node checks at 44.5 and grows to 3. The resize takes
    // 13.3 / 0.38 = 35 s while iterations stretch to 8.9 / 0.6, so 3
    // dilated iterations run and the growth lands at the third boundary.
    EngineConfig c;
    c.total_nodes = 3;
    c.ranks_per_node = 1;
    c.mam_override = forced(reconfig::SpawnMethod::Merge, true);
    c.costs = fixed_cost(13.3);
    const workload::Workload w{{job(2, JobType::Medium, 5, 2, 2, false, 0.0),
                                job(1, JobType::Small, 20, 1, 8, true, 0.0)}};
    const auto t = run(w, c);
    REQUIRE(t.episodes.size() == 1);
    const auto& ep = t.episodes[0];
    const double dilated = 8.9 / 0.6;
    const int k = int(std::ceil(35.0 / dilated));
    REQUIRE(k == 3);
    CHECK(ep.iterations_overlapped == k);
    CHECK(ep.t_start == doctest::Approx(44.5));
    CHECK(ep.t_end == doctest::Approx(44.5 + k * dilated));

    const auto iters = records_of(t, 1, RecordKind::IterationEnd);
    REQUIRE(iters.size() == 20);
    for (int i = 5; i < 5 + k; ++i) {
        CHECK(iters[i].time - iters[i - 1].time == doctest::Approx(dilated));
        CHECK(iters[i].nodes_after == 1);
    }
    CHECK(iters[5 + k].nodes_after == 3);
    CHECK(iters[5 + k].time - iters[4 + k].time == doctest::Approx(2.20));
    CHECK(t.jobs[1].end == doctest::Approx(44.5 + k * dilated + 12 * 2.20));
}

TEST_CASE("async resize outlasting the job waits for completion") {
    EngineConfig c;
    c.total_nodes = 3;
    c.ranks_per_node = 1;
    c.mam_override = forced(reconfig::SpawnMethod::Baseline, true);
    c.costs = fixed_cost(100.0);
    const workload::Workload w{{job(2, JobType::Medium, 5, 2, 2, false, 0.0),
                                job(1, JobType::Small, 7, 1, 8, true, 0.0)}};
    const auto t = run(w, c);
    REQUIRE(t.episodes.size() == 1);
    CHECK(t.episodes[0].t_end == doctest::Approx(44.5 + 100.0 / 0.22));
    CHECK(t.jobs[1].end == t.episodes[0].t_end);
    CHECK(t.episodes[0].iterations_overlapped == 2);
}

TEST_CASE("stalled and empty") {
    EngineConfig c;
    c.total_nodes = 5;
    Simulation sim({{job(1, JobType::Large, 10, 11, 11, false, 0.0)}}, c);
    CHECK_THROWS_AS(sim.run_to_end(), StalledSimulation);
    CHECK_THROWS_AS(sim.step(), EmptyQueue);
    CHECK_THROWS_AS(Simulation(workload::Workload{}, c), Error);
    CHECK_THROWS_AS(Simulation({{job(1, JobType::Large, 10, 3, 11, true, 0.0)}}, c),
                    scalability::BelowMinimum);
}

TEST_CASE("trace log format") {
    const auto t = run(hand_workload(), hand_config());
    std::ostringstream out;
    write_trace_log(out, t);
    const auto s = out.str();
    CHECK(s.rfind("time,kind,job,nodes_before,nodes_after\n", 0) == 0);
    CHECK(s.find(",ResizeStart,2,1,3\n") != std::string::npos);
}

namespace {

void check_invariants(const SimulationTrace& t, const experiment::Variant v) {
    // Iteration accounting and completion.
    for (const auto& j : t.jobs) {
        REQUIRE(j.done);
        REQUIRE(j.iterations_logged == j.spec.iterations);
        REQUIRE(int(records_of(t, j.spec.id, RecordKind::IterationEnd).size()) == j.spec.iterations);
    }
    // Clock monotonicity.
    for (std::size_t i = 1; i < t.records.size(); ++i)
        REQUIRE(t.records[i - 1].time <= t.records[i].time);
    // Node conservation and bounds at every snapshot.
    std::map<JobId, JobSpec> specs;
    for (const auto& j : t.jobs) specs[j.spec.id] = j.spec;
    for (const auto& s : t.snapshots) {
        int sum = 0;
        for (auto [id, n] : s.nodes) {
            REQUIRE(n >= specs[id].min_nodes);
            REQUIRE(n <= specs[id].max_nodes);
            sum += n;
        }
        REQUIRE(sum == s.allocated);
        REQUIRE(sum <= t.total_nodes);
    }
    const bool async = v == experiment::Variant::BaselineAsync || v == experiment::Variant::MergeAsync;
    for (const auto& ep : t.episodes) {
        REQUIRE(ep.t_end >= ep.t_start);
        REQUIRE(ep.plan.config.async == async);
        if (!async) {
            REQUIRE(ep.iterations_overlapped == 0);
            // No iteration of a blocked job ends inside its resize.
            for (const auto& r : records_of(t, ep.job, RecordKind::IterationEnd))
                REQUIRE_FALSE((r.time > ep.t_start && r.time < ep.t_end));
        }
    }
    // Inhibit: after a resize lands, the next one opens only after the
    // window of iterations has passed.
    for (const auto& j : t.jobs) {
        const auto iters = records_of(t, j.spec.id, RecordKind::IterationEnd);
        const ResizeEpisode* prev = nullptr;
        for (const auto& ep : t.episodes) {
            if (ep.job != j.spec.id) continue;
            REQUIRE(ep.t_end <= j.end);
            if (prev) {
                int between = 0;
                for (const auto& r : iters)
                    if (r.time > prev->t_end && r.time <= ep.t_start) ++between;
                REQUIRE(between >= j.spec.inhibit_window + 1);
            }
            prev = &ep;
        }
    }
}

}  // namespace

TEST_CASE("invariants across variants and seeds") {
    experiment::RunConfig cfg;
    cfg.costs = reconfig::load_cost_params(std::string(MALLSIM_CONFIG_DIR) + "/cost_params.json");
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto w = experiment::workload_for_seed(cfg, seed);
        for (auto v : experiment::kVariants) {
            const auto r = experiment::run_variant(cfg, w, v, seed);
            check_invariants(r.trace, v);
            const bool dynamic = v != experiment::Variant::Static;
            CHECK(r.trace.episodes.empty() != dynamic);
        }
    }
}

TEST_CASE("runs are deterministic") {
    experiment::RunConfig cfg;
    const auto w = experiment::workload_for_seed(cfg, 4);
    for (auto v : experiment::kVariants) {
        const auto a = experiment::run_variant(cfg, w, v, 4);
        const auto b = experiment::run_variant(cfg, w, v, 4);
        std::ostringstream sa, sb;
        write_trace_log(sa, a.trace);
        write_trace_log(sb, b.trace);
        CHECK(sa.str() == sb.str());
        CHECK(a.trace.snapshots == b.trace.snapshots);
    }
}
