#include "mallsim/metrics.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "mallsim/format.hpp"

namespace mallsim::metrics {

double lower_median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

RunReport compute(const engine::SimulationTrace& trace) {
    if (trace.jobs.empty()) throw IncompleteTrace("trace has no jobs");
    Seconds first_arrival = std::numeric_limits<Seconds>::infinity();
    Seconds last_done = 0.0;
    std::map<JobType, std::vector<double>> waits, runs, turns;
    for (const auto& j : trace.jobs) {
        if (!j.done)
            throw IncompleteTrace("job " + std::to_string(j.spec.id) + " did not finish");
        first_arrival = std::min(first_arrival, j.spec.submit_time);
        last_done = std::max(last_done, j.end);
        const Seconds wait = j.start - j.spec.submit_time;
        const Seconds run = j.end - j.start;
        waits[j.spec.jtype].push_back(wait);
        runs[j.spec.jtype].push_back(run);
        turns[j.spec.jtype].push_back(wait + run);
    }

    RunReport r;
    r.makespan = last_done - first_arrival;
    for (const auto& [t, w] : waits) {
        r.per_type[t] = TypeMedians{int(w.size()), lower_median(w), lower_median(runs[t]),
                                    lower_median(turns[t])};
    }

    // Allocation is a step function between snapshots.
    const double total = trace.total_nodes;
    double area = 0.0;
    r.utilization_series.emplace_back(0.0, 0.0);
    for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
        const auto& s = trace.snapshots[k];
        const Seconds t = s.time - first_arrival;
        const Seconds next =
            k + 1 < trace.snapshots.size() ? trace.snapshots[k + 1].time - first_arrival : r.makespan;
        area += double(s.allocated) * (next - t);
        if (r.utilization_series.back().first == t)
            r.utilization_series.back().second = s.allocated / total;
        else
            r.utilization_series.emplace_back(t, s.allocated / total);
    }
    r.mean_utilization = r.makespan > 0.0 ? area / (total * r.makespan) : 0.0;

    std::vector<double> totals, spawns, redists;
    for (const auto& ep : trace.episodes) {
        r.accumulated_resize += ep.duration();
        r.overlapped_iterations += ep.iterations_overlapped;
        totals.push_back(ep.duration());
        spawns.push_back(ep.plan.config.async ? ep.plan.spawn_time / ep.plan.sync_duration *
                                                    ep.duration()
                                              : ep.plan.spawn_time);
        redists.push_back(ep.plan.redist_time);
    }
    r.resize_count = int(trace.episodes.size());
    r.median_resize = lower_median(totals);
    r.median_spawn = lower_median(spawns);
    r.median_redistribution = lower_median(redists);
    r.queue_empty_time = trace.queue_empty_time.value_or(last_done) - first_arrival;
    r.all_submitted_time = trace.last_arrival - first_arrival;
    return r;
}

RunReport aggregate(std::span<const RunReport> reports) {
    if (reports.empty()) throw Error("aggregate needs at least one report");
    auto med = [&](auto field) {
        std::vector<double> v;
        for (const auto& r : reports) v.push_back(double(field(r)));
        return lower_median(std::move(v));
    };
    RunReport out;
    out.makespan = med([](const RunReport& r) { return r.makespan; });
    out.mean_utilization = med([](const RunReport& r) { return r.mean_utilization; });
    out.accumulated_resize = med([](const RunReport& r) { return r.accumulated_resize; });
    out.resize_count = int(med([](const RunReport& r) { return r.resize_count; }));
    out.overlapped_iterations = int(med([](const RunReport& r) { return r.overlapped_iterations; }));
    out.median_resize = med([](const RunReport& r) { return r.median_resize; });
    out.median_spawn = med([](const RunReport& r) { return r.median_spawn; });
    out.median_redistribution = med([](const RunReport& r) { return r.median_redistribution; });
    out.queue_empty_time = med([](const RunReport& r) { return r.queue_empty_time; });
    out.all_submitted_time = med([](const RunReport& r) { return r.all_submitted_time; });
    for (JobType t : kJobTypes) {
        std::vector<double> w, ru, tu;
        std::vector<double> counts;
        for (const auto& r : reports) {
            auto it = r.per_type.find(t);
            if (it == r.per_type.end()) continue;
            w.push_back(it->second.wait);
            ru.push_back(it->second.run);
            tu.push_back(it->second.turnaround);
            counts.push_back(it->second.jobs);
        }
        if (w.empty()) continue;
        out.per_type[t] = TypeMedians{int(lower_median(counts)), lower_median(w),
                                      lower_median(ru), lower_median(tu)};
    }
    // Series of the repetition whose makespan is the reported median.
    for (const auto& r : reports) {
        if (r.makespan == out.makespan) {
            out.utilization_series = r.utilization_series;
            break;
        }
    }
    return out;
}

void write_jobs_csv(std::ostream& out, const engine::SimulationTrace& trace) {
    out << "id,jtype,submit,start,end,wait,run,turnaround,resizes,node_seconds\n";
    for (const auto& j : trace.jobs) {
        const Seconds wait = j.start - j.spec.submit_time;
        const Seconds run = j.end - j.start;
        out << j.spec.id << ',' << to_string(j.spec.jtype) << ',' << format_double(j.spec.submit_time)
            << ',' << format_double(j.start) << ',' << format_double(j.end) << ','
            << format_double(wait) << ',' << format_double(run) << ',' << format_double(wait + run)
            << ',' << j.resizes << ',' << format_double(j.node_seconds) << '\n';
    }
}

void write_utilization_csv(std::ostream& out, const RunReport& report) {
    out << "time,utilization\n";
    for (const auto& [t, u] : report.utilization_series)
        out << format_double(t) << ',' << format_double(u) << '\n';
}

void write_episodes_csv(std::ostream& out, const engine::SimulationTrace& trace) {
    out << "job,t_start,t_end,nodes_before,nodes_after,method,async,spawned,spawn_time,"
           "redist_time,sync_duration,async_duration,overlapped_iterations,memory_peak\n";
    for (const auto& e : trace.episodes) {
        out << e.job << ',' << format_double(e.t_start) << ',' << format_double(e.t_end) << ','
            << e.nodes_before << ',' << e.nodes_after << ','
            << reconfig::to_string(e.plan.config.spawn_method) << ','
            << (e.plan.config.async ? 1 : 0) << ',' << e.plan.spawned << ','
            << format_double(e.plan.spawn_time) << ',' << format_double(e.plan.redist_time) << ','
            << format_double(e.plan.sync_duration) << ',' << format_double(e.plan.async_duration)
            << ',' << e.iterations_overlapped << ',' << format_double(e.plan.memory_peak) << '\n';
    }
}

}  // namespace mallsim::metrics
