#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mallsim/model.hpp"

namespace mallsim::scalability {

class BelowMinimum : public Error {
public:
    using Error::Error;
};

/// Measured iteration time per node count, starting at the minimum
/// node count N0 able to hold the problem.
class ScalabilityProfile {
public:
    ScalabilityProfile() = default;
    /// `times[i]` is the iteration time on `base_nodes + i` nodes.
    ScalabilityProfile(JobType jtype, int base_nodes, std::vector<Seconds> times);

    JobType jtype() const { return jtype_; }
    int base_nodes() const { return base_nodes_; }
    int last_sampled_nodes() const { return base_nodes_ + int(times_.size()) - 1; }
    std::span<const Seconds> times() const { return times_; }

private:
    JobType jtype_ = JobType::Small;
    int base_nodes_ = 1;
    std::vector<Seconds> times_;
};

using ProfileSet = std::map<JobType, ScalabilityProfile>;

/// Tabulated time; flat beyond the last sample.
Seconds iteration_time(const ScalabilityProfile& profile, int nodes);
double speedup(const ScalabilityProfile& profile, int nodes);
double efficiency(const ScalabilityProfile& profile, int nodes);

struct NormalizedSeries {
    std::vector<double> values;
    bool degenerate = false;  // max == min; values are all zero
};

/// Min-max normalization of an efficiency series onto [0, 1].
NormalizedSeries normalized_efficiency(std::span<const double> series);

/// Efficiencies for every sampled node count, base first.
std::vector<double> efficiency_series(const ScalabilityProfile& profile);

/// Largest node count whose efficiency stays at or above the N0 efficiency,
/// scanning upward from N0 and stopping at the first drop.
int static_max_nodes(const ScalabilityProfile& profile);

/// Iteration times of the reference MPDATA runs (112 ranks per node).
const ProfileSet& default_profiles();

/// Reads `jtype,nodes,seconds` records (one per line, optional header,
/// `#` comments). Throws Error with the offending line number.
ProfileSet load_profiles(const std::filesystem::path& path);
ProfileSet parse_profiles(const std::string& text);

}  // namespace mallsim::scalability
