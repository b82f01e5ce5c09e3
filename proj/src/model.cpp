#include "mallsim/model.hpp"

#include <string>

namespace mallsim {

std::string_view to_string(JobType t) {
    switch (t) {
        case JobType::Small: return "Small";
        case JobType::Medium: return "Medium";
        case JobType::Large: return "Large";
    }
    return "?";
}

JobType job_type_from_string(std::string_view s) {
    if (s == "Small") return JobType::Small;
    if (s == "Medium") return JobType::Medium;
    if (s == "Large") return JobType::Large;
    throw Error("unknown job type '" + std::string(s) + "'");
}

const JobTypeInfo& job_type_info(JobType t) {
    static const JobTypeInfo small{{8192, 2048, 128}, 20, 0.2, 1, 8};
    static const JobTypeInfo medium{{8192, 4096, 128}, 60, 0.2, 2, 6};
    static const JobTypeInfo large{{8192, 8192, 128}, 100, 0.6, 4, 11};
    switch (t) {
        case JobType::Small: return small;
        case JobType::Medium: return medium;
        case JobType::Large: return large;
    }
    throw Error("unknown job type");
}

std::string_view to_string(JobPhase p) {
    switch (p) {
        case JobPhase::Pending: return "Pending";
        case JobPhase::Running: return "Running";
        case JobPhase::Resizing: return "Resizing";
        case JobPhase::Done: return "Done";
    }
    return "?";
}

void JobSpec::validate() const {
    auto fail = [this](const std::string& what) {
        throw Error("job " + std::to_string(id) + ": " + what);
    };
    if (min_nodes < 1) fail("min_nodes must be >= 1");
    if (max_nodes < min_nodes) fail("max_nodes must be >= min_nodes");
    if (iterations < 1) fail("iterations must be >= 1");
    if (inhibit_window < 0) fail("inhibit_window must be >= 0");
    if (!(submit_time >= 0.0)) fail("submit_time must be non-negative");
}

ClusterState::ClusterState(int total_nodes, int ranks_per_node)
    : total_nodes_(total_nodes), ranks_per_node_(ranks_per_node), idle_(total_nodes) {
    if (total_nodes < 1) throw Error("cluster needs at least one node");
    if (ranks_per_node < 1) throw Error("ranks_per_node must be >= 1");
}

int ClusterState::nodes_of(JobId job) const {
    auto it = allocations_.find(job);
    return it == allocations_.end() ? 0 : it->second;
}

void ClusterState::allocate(JobId job, int nodes) {
    if (allocations_.contains(job))
        throw InfeasibleAllocation("job " + std::to_string(job) + " already holds nodes");
    if (nodes < 1) throw InfeasibleAllocation("a new allocation needs at least one node");
    if (nodes > idle_)
        throw InfeasibleAllocation("job " + std::to_string(job) + " asks " + std::to_string(nodes) +
                                   " nodes, " + std::to_string(idle_) + " idle");
    allocations_.emplace(job, nodes);
    idle_ -= nodes;
}

void ClusterState::apply_allocation(JobId job, int nodes) {
    auto it = allocations_.find(job);
    if (it == allocations_.end()) throw UnknownJob("job " + std::to_string(job) + " holds no nodes");
    if (nodes < 0) throw InfeasibleAllocation("negative node count");
    const int growth = nodes - it->second;
    if (growth > idle_)
        throw InfeasibleAllocation("job " + std::to_string(job) + " grows by " +
                                   std::to_string(growth) + " nodes, " + std::to_string(idle_) +
                                   " idle");
    idle_ -= growth;
    if (nodes == 0)
        allocations_.erase(it);
    else
        it->second = nodes;
}

ClusterState apply_allocation(ClusterState cluster, JobId job, int nodes) {
    cluster.apply_allocation(job, nodes);
    return cluster;
}

void SimClock::advance_to(Seconds t) {
    if (t < now_) throw Error("simulated time moved backwards");
    now_ = t;
}

}  // namespace mallsim
