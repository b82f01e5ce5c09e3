#include "mallsim/calibration.hpp"

#include <cmath>

#include <gsl/gsl_multimin.h>

namespace mallsim::calibration {

Outcome evaluate(const experiment::RunConfig& cfg, const reconfig::CostParams& params) {
    experiment::RunConfig c = cfg;
    c.costs = params;
    const experiment::Variant variants[] = {experiment::Variant::Baseline,
                                            experiment::Variant::Merge};
    const auto runs = experiment::run_matrix(c, variants);
    const auto summary = experiment::summarize(runs);
    const auto& b = summary.at(experiment::Variant::Baseline);
    const auto& m = summary.at(experiment::Variant::Merge);
    Outcome o;
    o.baseline_accumulated = b.accumulated_resize;
    o.merge_accumulated = m.accumulated_resize;
    o.resize_speedup = m.median_resize > 0.0 ? b.median_resize / m.median_resize : 0.0;
    return o;
}

double loss(const Outcome& o, const Targets& t) {
    auto sq_log = [](double got, double want) {
        if (!(got > 0.0)) return 1e6;
        const double e = std::log(got / want);
        return e * e;
    };
    return sq_log(o.baseline_accumulated, t.baseline_accumulated) +
           sq_log(o.merge_accumulated, t.merge_accumulated) +
           t.speedup_weight * sq_log(o.resize_speedup, t.resize_speedup);
}

namespace {

struct Problem {
    const experiment::RunConfig* cfg;
    const Targets* targets;
};

reconfig::CostParams unpack(const gsl_vector* x, reconfig::CostParams base) {
    base.spawn_fixed = std::exp(gsl_vector_get(x, 0));
    base.spawn_per_rank = std::exp(gsl_vector_get(x, 1));
    base.redist_bandwidth = std::exp(gsl_vector_get(x, 2));
    return base;
}

double objective(const gsl_vector* x, void* data) {
    const auto* p = static_cast<const Problem*>(data);
    try {
        return loss(evaluate(*p->cfg, unpack(x, p->cfg->costs)), *p->targets);
    } catch (...) {
        return 1e12;
    }
}

}  // namespace

Result calibrate(const experiment::RunConfig& cfg, const Targets& targets, int max_iterations) {
    cfg.costs.validate();
    Problem problem{&cfg, &targets};
    gsl_multimin_function fn{&objective, 3, &problem};

    gsl_vector* x = gsl_vector_alloc(3);
    gsl_vector_set(x, 0, std::log(cfg.costs.spawn_fixed));
    gsl_vector_set(x, 1, std::log(cfg.costs.spawn_per_rank));
    gsl_vector_set(x, 2, std::log(cfg.costs.redist_bandwidth));
    gsl_vector* step = gsl_vector_alloc(3);
    gsl_vector_set_all(step, 0.7);

    gsl_multimin_fminimizer* solver =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
    gsl_multimin_fminimizer_set(solver, &fn, x, step);

    Result r;
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && r.iterations < max_iterations) {
        ++r.iterations;
        if (gsl_multimin_fminimizer_iterate(solver)) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-4);
    }
    r.converged = status == GSL_SUCCESS;
    r.params = unpack(gsl_multimin_fminimizer_x(solver), cfg.costs);
    r.loss = gsl_multimin_fminimizer_minimum(solver);
    r.outcome = evaluate(cfg, r.params);

    gsl_multimin_fminimizer_free(solver);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return r;
}

}  // namespace mallsim::calibration
