#include <doctest.h>

#include <random>
#include <vector>

#include "mallsim/reconfig.hpp"

using namespace mallsim;
using namespace mallsim::reconfig;

TEST_CASE("config choice") {
    auto c = choose_config(448, 672, 448);
    CHECK(c.spawn_method == SpawnMethod::Merge);
    CHECK(c.parallel);
    CHECK_FALSE(c.intracomm);

    c = choose_config(672, 336, 448);
    CHECK(c.spawn_method == SpawnMethod::Baseline);
    CHECK(c.intracomm);

    c = choose_config(672, 560, 448);
    CHECK(c.spawn_method == SpawnMethod::Merge);

    MamConfig x;
    x.spawn_method = SpawnMethod::Baseline;
    x.async = true;
    x.user_override = true;
    CHECK(choose_config(448, 672, 448, x) == x);
    CHECK(choose_config(672, 336, 448, x) == x);
}

TEST_CASE("merge never pairs with intracomm") {
    for (int ns = 1; ns <= 40; ++ns)
        for (int nt = 1; nt <= 40; ++nt)
            for (int orig = 1; orig <= 40; orig += 3) {
                const auto c = choose_config(ns, nt, orig);
                REQUIRE_FALSE((c.spawn_method == SpawnMethod::Merge && c.intracomm));
            }
}

TEST_CASE("spawn counts") {
    CHECK(spawn_count(SpawnMethod::Baseline, 448, 672) == 672);
    CHECK(spawn_count(SpawnMethod::Merge, 448, 672) == 224);
    CHECK(spawn_count(SpawnMethod::Merge, 672, 448) == 0);
    CHECK(spawn_count(SpawnMethod::Baseline, 672, 448) == 448);
}

TEST_CASE("memory examples") {
    CHECK(memory_required(SpawnMethod::Baseline, 100, 4, 5, 0) == doctest::Approx(45));
    CHECK(memory_required(SpawnMethod::Merge, 100, 4, 5, 0) == doctest::Approx(25));
    CHECK(memory_required(SpawnMethod::Merge, 100, 4, 4, 7) == doctest::Approx(32));
}

TEST_CASE("merge needs less memory") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ps(1e-3, 1e12), c(0.0, 1e6);
    std::uniform_int_distribution<int> ranks(1, 4096);
    for (int i = 0; i < 20000; ++i) {
        const double p = ps(rng), k = c(rng);
        const int ns = ranks(rng), nt = ranks(rng);
        REQUIRE(memory_required(SpawnMethod::Merge, p, ns, nt, k) <
                memory_required(SpawnMethod::Baseline, p, ns, nt, k));
    }
}

TEST_CASE("block examples") {
    CHECK(block_distribution(8192, 5, 0) == Block{0, 1639, 1639});
    CHECK(block_distribution(8192, 5, 2) == Block{3278, 4916, 1638});
    CHECK(block_distribution(4, 4, 3) == Block{3, 4, 1});
    CHECK_THROWS_AS(block_distribution(10, 3, 3), InvalidRank);
    CHECK_THROWS_AS(block_distribution(10, 3, -1), InvalidRank);
    CHECK_THROWS_AS(block_distribution(10, 0, 0), InvalidRank);
    CHECK_THROWS_AS(block_distribution(2, 3, 0), UndersizedDimension);
}

TEST_CASE("blocks partition the dimension") {
    for (int n_dim = 1; n_dim <= 600; ++n_dim) {
        for (int size = 1; size <= n_dim; size += (size < 40 ? 1 : 17)) {
            int next = 0, lo = n_dim, hi = 0;
            for (int r = 0; r < size; ++r) {
                const auto b = block_distribution(n_dim, size, r);
                REQUIRE(b.ini == next);
                REQUIRE(b.n == b.end - b.ini);
                lo = std::min(lo, b.n);
                hi = std::max(hi, b.n);
                next = b.end;
            }
            REQUIRE(next == n_dim);
            REQUIRE(hi - lo <= 1);
        }
    }
}

namespace {

std::vector<int> owners(int n_dim, int size) {
    std::vector<int> own(n_dim);
    for (int r = 0; r < size; ++r) {
        const auto b = block_distribution(n_dim, size, r);
        for (int i = b.ini; i < b.end; ++i) own[i] = r;
    }
    return own;
}

// Per-slice oracle: every (source, target) pair and its slice count.
std::map<std::pair<int, int>, int> slice_pairs(int n_dim, int ns, int nt) {
    const auto src = owners(n_dim, ns), dst = owners(n_dim, nt);
    std::map<std::pair<int, int>, int> out;
    for (int i = 0; i < n_dim; ++i) ++out[{src[i], dst[i]}];
    return out;
}

}  // namespace

TEST_CASE("plan examples") {
    const auto p = redistribution_plan(10, 1.0, 1, 2);
    REQUIRE(p.transfers.size() == 2);
    CHECK(p.transfers[0] == Transfer{0, 0, 5});
    CHECK(p.transfers[1] == Transfer{0, 1, 5});
    CHECK(p.moved_slices() == 5);

    const auto same = redistribution_plan(100, 2.0, 7, 7);
    int sum = 0;
    for (const auto& t : same.transfers) {
        CHECK(t.source == t.target);
        sum += t.slices;
    }
    CHECK(sum == 100);
    CHECK(same.moved_volume() == 0.0);

    const auto big = redistribution_plan(8192, 3.0, 5, 4);
    std::map<std::pair<int, int>, int> got;
    for (const auto& t : big.transfers) got[{t.source, t.target}] += t.slices;
    CHECK(got == slice_pairs(8192, 5, 4));
}

TEST_CASE("plans match the per-slice oracle") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        const int n_dim = 1 + int(rng() % 3000);
        const int ns = 1 + int(rng() % n_dim), nt = 1 + int(rng() % n_dim);
        const auto p = redistribution_plan(n_dim, 1.0, ns, nt);
        std::map<std::pair<int, int>, int> got;
        long long moved = 0;
        for (const auto& t : p.transfers) {
            REQUIRE(t.slices > 0);
            got[{t.source, t.target}] += t.slices;
            if (t.source != t.target) moved += t.slices;
        }
        REQUIRE(got == slice_pairs(n_dim, ns, nt));
        REQUIRE(p.moved_slices() == moved);
    }
}

TEST_CASE("moved volume counts every array") {
    const auto p = redistribution_plan(10, 2.5, 1, 2, 4);
    CHECK(p.moved_volume() == 5 * 2.5 * 4);
}

TEST_CASE("resize cost shape") {
    CostParams params;
    params.spawn_fixed = 0.5;
    params.spawn_per_rank = 0.01;
    params.redist_bandwidth = 100.0;
    const auto plan = redistribution_plan(10, 2.0, 1, 2);

    MamConfig b;
    b.spawn_method = SpawnMethod::Baseline;
    MamConfig m;
    const auto cb = resize_cost(plan, b, params);
    const auto cm = resize_cost(plan, m, params);
    CHECK(cb.spawn_time == doctest::Approx(0.5 + 0.02));
    CHECK(cm.spawn_time == doctest::Approx(0.5 + 0.01));
    CHECK(cm.spawn_time < cb.spawn_time);
    CHECK(cb.redist_time == doctest::Approx(5 * 2.0 * 4 / 100.0));
    CHECK(cb.sync_duration == doctest::Approx(cb.spawn_time + cb.redist_time));
    CHECK(cb.overlap_speedup == 1.0);

    b.async = true;
    const auto ab = resize_cost(plan, b, params);
    CHECK(ab.async_duration == doctest::Approx(ab.sync_duration / 0.22));
    CHECK(ab.overlap_speedup == 0.41);
    m.async = true;
    const auto am = resize_cost(plan, m, params);
    CHECK(am.async_duration == doctest::Approx(am.sync_duration / 0.38));
    CHECK(am.overlap_speedup == 0.60);

    const auto shrink = redistribution_plan(10, 2.0, 2, 1);
    CHECK(resize_cost(shrink, MamConfig{}, params).spawn_time == 0.5);
}

TEST_CASE("resize plan") {
    const GridDims g{8192, 8192, 128};
    const CostParams params;
    const auto p = plan_resize(g, 448, 672, choose_config(448, 672, 448), params);
    CHECK(p.spawned == 224);
    CHECK(p.ns == 448);
    CHECK(p.nt == 672);
    const double ps = 8192.0 * g.slice_volume() * 4;
    CHECK(p.memory_peak == doctest::Approx(ps / 448));
    CHECK(p.duration() == p.sync_duration);
}

TEST_CASE("cost params io") {
    CostParams p;
    p.spawn_fixed = 0.125;
    p.redist_bandwidth = 3.5e9;
    CHECK(cost_params_from_json(to_json(p)) == p);
    CHECK_THROWS_AS(cost_params_from_json(R"({"spawn_fixed": -1})"), Error);
    CHECK_THROWS_AS(cost_params_from_json("[1,2]"), Error);
    CHECK_NOTHROW(load_cost_params(std::string(MALLSIM_CONFIG_DIR) + "/cost_params.json"));
    p.async_resize_factor_merge = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
}
