#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mallsim/engine.hpp"

namespace mallsim::metrics {

class IncompleteTrace : public Error {
public:
    using Error::Error;
};

struct TypeMedians {
    int jobs = 0;
    Seconds wait = 0.0;
    Seconds run = 0.0;
    Seconds turnaround = 0.0;

    bool operator==(const TypeMedians&) const = default;
};

struct RunReport {
    Seconds makespan = 0.0;
    std::map<JobType, TypeMedians> per_type;
    double mean_utilization = 0.0;
    std::vector<std::pair<Seconds, double>> utilization_series;  // step function, value holds until next point
    Seconds accumulated_resize = 0.0;
    int resize_count = 0;
    int overlapped_iterations = 0;
    Seconds median_resize = 0.0;  // per-episode total resize time
    Seconds median_spawn = 0.0;
    Seconds median_redistribution = 0.0;
    Seconds queue_empty_time = 0.0;  // relative to the first arrival
    Seconds all_submitted_time = 0.0;

    bool operator==(const RunReport&) const = default;
};

/// Lower-middle median: element (n-1)/2 of the sorted values; 0 for empty input.
double lower_median(std::vector<double> values);

RunReport compute(const engine::SimulationTrace& trace);

/// Element-wise lower medians across repetitions. The utilization series is
/// taken from the repetition holding the median makespan.
RunReport aggregate(std::span<const RunReport> reports);

/// Per-job rows: id, type, submit, start, end, wait, run, turnaround, resizes, node-seconds.
void write_jobs_csv(std::ostream& out, const engine::SimulationTrace& trace);
void write_utilization_csv(std::ostream& out, const RunReport& report);
void write_episodes_csv(std::ostream& out, const engine::SimulationTrace& trace);

}  // namespace mallsim::metrics
