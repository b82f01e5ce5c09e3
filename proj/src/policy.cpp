#include "mallsim/policy.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mallsim::policy {

StartSizeRule start_size_rule_from_string(std::string_view s) {
    if (s == "largest") return StartSizeRule::Largest;
    if (s == "minimum") return StartSizeRule::Minimum;
    throw Error("unknown start-size rule '" + std::string(s) + "' (largest|minimum)");
}

ExpansionRule expansion_rule_from_string(std::string_view s) {
    if (s == "maximal") return ExpansionRule::Maximal;
    if (s == "single") return ExpansionRule::SingleNode;
    throw Error("unknown expansion rule '" + std::string(s) + "' (maximal|single)");
}

PendingJob pending_entry(const JobSpec& spec) {
    return {spec.id, spec.min_nodes, spec.max_nodes, spec.malleable};
}

int QueueState::reserved_total() const {
    return std::accumulate(reserved.begin(), reserved.end(), 0,
                           [](int acc, const auto& kv) { return acc + kv.second; });
}

bool QueueState::is_pending(JobId id) const {
    return std::any_of(pending.begin(), pending.end(),
                       [id](const PendingJob& p) { return p.id == id; });
}

ReconfigDecision select_natural(const JobState& trigger, const QueueState& queue,
                                const ClusterState& cluster, const PolicyConfig& config) {
    const JobSpec& spec = trigger.spec;
    if (trigger.phase != JobPhase::Running || !spec.malleable || trigger.inhibit_remaining > 0 ||
        trigger.resize_in_flight)
        throw NotEligible("job " + std::to_string(spec.id) + " cannot be reconfigured now");

    const int current = trigger.current_nodes;
    const int idle = std::max(0, cluster.idle_nodes() - queue.reserved_total());

    auto expand = [&]() -> ReconfigDecision {
        if (idle == 0 || current >= spec.max_nodes) return {};
        const int grow = config.expansion == ExpansionRule::Maximal ? idle : 1;
        return {std::min(spec.max_nodes, current + grow), std::nullopt, 0};
    };

    if (queue.pending.empty()) return expand();

    const int releasable = std::max(0, current - spec.min_nodes);
    for (const PendingJob& p : queue.pending) {
        if (queue.priority_boosts.contains(p.id)) continue;
        const int need = p.required_nodes();
        // Only jobs that actually need some of this job's nodes.
        if (need > idle && need <= idle + releasable) {
            return {current - (need - idle), p.id, idle};
        }
    }
    return expand();
}

std::vector<StartOrder> try_start_jobs(const QueueState& queue, const ClusterState& cluster,
                                       Seconds now, const PolicyConfig& config) {
    std::vector<const PendingJob*> order;
    order.reserve(queue.pending.size());
    for (const auto& p : queue.pending)
        if (queue.priority_boosts.contains(p.id)) order.push_back(&p);
    for (const auto& p : queue.pending)
        if (!queue.priority_boosts.contains(p.id)) order.push_back(&p);

    int idle = cluster.idle_nodes();
    int held = queue.reserved_total();
    std::vector<StartOrder> started;
    for (const PendingJob* p : order) {
        auto it = queue.reserved.find(p->id);
        const int own = it == queue.reserved.end() ? 0 : it->second;
        const int usable = idle - (held - own);
        const int need = p->required_nodes();
        if (need <= usable) {
            int size = need;
            if (p->malleable && config.start_size == StartSizeRule::Largest)
                size = std::min(p->max_nodes, usable);
            started.push_back({p->id, size, now});
            idle -= size;
            held -= own;
        } else if (!config.backfill) {
            break;
        }
    }
    return started;
}

}  // namespace mallsim::policy
