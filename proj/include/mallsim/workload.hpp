#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mallsim/model.hpp"
#include "mallsim/scalability.hpp"

namespace mallsim::workload {

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class MalformedFile : public Error {
public:
    using Error::Error;
};

struct WorkloadSpec {
    int job_count = 30;
    std::map<JobType, double> type_weights{
        {JobType::Small, 0.2}, {JobType::Medium, 0.2}, {JobType::Large, 0.6}};
    Seconds mean_interarrival = 10.0;
    bool malleable = true;
    std::uint64_t seed = 1;
    int inhibit_window = 4;

    void validate() const;  // throws InvalidSpec
};

struct Workload {
    std::vector<JobSpec> jobs;

    bool operator==(const Workload&) const = default;
};

/// Draws `job_count` jobs: types from the weights, exponential gaps between
/// submissions, node bounds from the profiles (N0 and the static size).
/// Static workloads pin min == max == static size.
Workload generate(const WorkloadSpec& spec,
                  const scalability::ProfileSet& profiles = scalability::default_profiles());

/// Same jobs, submission times, and iteration counts, rigid at the static size.
Workload make_static(const Workload& w,
                     const scalability::ProfileSet& profiles = scalability::default_profiles());

std::string to_json(const Workload& w);
/// `inhibit_window` is not part of the file and is applied to every job.
Workload from_json(const std::string& text, int inhibit_window = 4);

void save(const Workload& w, const std::filesystem::path& path);
Workload load(const std::filesystem::path& path, int inhibit_window = 4);

}  // namespace mallsim::workload
