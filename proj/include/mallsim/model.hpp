#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mallsim {

using JobId = std::int64_t;
using Seconds = double;

/// Base of every error raised by the simulator library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleAllocation : public Error {
public:
    using Error::Error;
};

class UnknownJob : public Error {
public:
    using Error::Error;
};

enum class JobType { Small, Medium, Large };

std::string_view to_string(JobType t);
JobType job_type_from_string(std::string_view s);  // throws Error

inline constexpr JobType kJobTypes[] = {JobType::Small, JobType::Medium, JobType::Large};

/// 3D grid extents; the N dimension is block-distributed across ranks.
struct GridDims {
    int n = 0;
    int m = 0;
    int l = 0;

    /// Values in one N-plane, halo layout (M+1)x(L+1).
    double slice_volume() const { return double(m + 1) * double(l + 1); }
};

/// Per-type configuration of the reference MPDATA jobs.
struct JobTypeInfo {
    GridDims grid;
    int iterations;
    double likelihood;
    int min_nodes;
    int max_nodes;
};

const JobTypeInfo& job_type_info(JobType t);

/// Static description of a submitted job.
struct JobSpec {
    JobId id = 0;
    JobType jtype = JobType::Small;
    int iterations = 1;
    int min_nodes = 1;
    int max_nodes = 1;
    bool malleable = false;
    Seconds submit_time = 0.0;
    int inhibit_window = 0;

    /// Throws Error when the bounds or counts are out of range.
    void validate() const;

    bool operator==(const JobSpec&) const = default;
};

enum class JobPhase { Pending, Running, Resizing, Done };

std::string_view to_string(JobPhase p);

/// Whole-node cluster with a job-id -> node-count allocation map.
class ClusterState {
public:
    ClusterState() = default;
    ClusterState(int total_nodes, int ranks_per_node);

    int total_nodes() const { return total_nodes_; }
    int ranks_per_node() const { return ranks_per_node_; }
    int idle_nodes() const { return idle_; }
    int allocated_nodes() const { return total_nodes_ - idle_; }
    const std::map<JobId, int>& allocations() const { return allocations_; }

    /// Nodes held by `job`, 0 when it has no allocation.
    int nodes_of(JobId job) const;
    bool holds(JobId job) const { return allocations_.contains(job); }

    /// Gives a job without an allocation its first `nodes` (>= 1).
    void allocate(JobId job, int nodes);

    /// Resizes an existing allocation; 0 releases it.
    void apply_allocation(JobId job, int nodes);

private:
    int total_nodes_ = 0;
    int ranks_per_node_ = 1;
    int idle_ = 0;
    std::map<JobId, int> allocations_;
};

/// Free-function form returning the updated value.
ClusterState apply_allocation(ClusterState cluster, JobId job, int nodes);

/// Mutable per-job bookkeeping owned by the engine.
struct JobState {
    JobSpec spec;
    JobPhase phase = JobPhase::Pending;
    int current_nodes = 0;
    int iterations_done = 0;
    int inhibit_remaining = 0;
    bool resize_in_flight = false;
    Seconds wait_time = 0.0;
    Seconds run_time = 0.0;
};

/// Monotone simulated clock.
class SimClock {
public:
    Seconds now() const { return now_; }
    /// Throws Error if `t` would move time backwards.
    void advance_to(Seconds t);

private:
    Seconds now_ = 0.0;
};

}  // namespace mallsim
