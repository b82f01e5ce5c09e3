#pragma once

#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "mallsim/model.hpp"

namespace mallsim::policy {

class NotEligible : public Error {
public:
    using Error::Error;
};

/// Size a malleable job is started with.
enum class StartSizeRule {
    Largest,  // largest size <= max_nodes that fits
    Minimum,  // always min_nodes
};

/// Target of an expand decision.
enum class ExpansionRule {
    Maximal,     // up to max_nodes or until idle nodes run out
    SingleNode,  // one node per decision
};

struct PolicyConfig {
    bool backfill = true;
    StartSizeRule start_size = StartSizeRule::Largest;
    ExpansionRule expansion = ExpansionRule::Maximal;
};

StartSizeRule start_size_rule_from_string(std::string_view s);
ExpansionRule expansion_rule_from_string(std::string_view s);

struct PendingJob {
    JobId id = 0;
    int min_nodes = 1;
    int max_nodes = 1;
    bool malleable = false;

    /// Fewest nodes the job can start on; rigid jobs need their fixed size.
    int required_nodes() const { return malleable ? min_nodes : max_nodes; }
};

PendingJob pending_entry(const JobSpec& spec);

struct QueueState {
    std::vector<PendingJob> pending;  // submit order
    std::set<JobId> priority_boosts;
    /// Idle nodes held back for a boosted job until its donor finishes shrinking.
    std::map<JobId, int> reserved;

    int reserved_total() const;
    bool is_pending(JobId id) const;
};

struct ReconfigDecision {
    int resultant_nodes = 0;  // 0: keep the current size
    std::optional<JobId> released_for;
    int reserved_idle = 0;  // idle nodes the beneficiary will also use

    bool operator==(const ReconfigDecision&) const = default;
};

/// Reconfiguration answer for a malleable job at a sync point: grow into idle
/// nodes when nobody waits, otherwise give up just enough nodes (never below
/// min_nodes) for the first pending job that then fits, else grow if possible.
ReconfigDecision select_natural(const JobState& trigger, const QueueState& queue,
                                const ClusterState& cluster, const PolicyConfig& config = {});

struct StartOrder {
    JobId id = 0;
    int nodes = 0;
    Seconds start_time = 0.0;

    bool operator==(const StartOrder&) const = default;
};

/// FCFS with backfill; boosted jobs go to the head of the line.
std::vector<StartOrder> try_start_jobs(const QueueState& queue, const ClusterState& cluster,
                                       Seconds now, const PolicyConfig& config = {});

}  // namespace mallsim::policy
