#include "mallsim/engine.hpp"

#include <ostream>
#include <string>

#include "mallsim/format.hpp"

namespace mallsim::engine {

std::string_view to_string(RecordKind k) {
    switch (k) {
        case RecordKind::Arrival: return "Arrival";
        case RecordKind::Start: return "Start";
        case RecordKind::IterationEnd: return "IterationEnd";
        case RecordKind::ResizeStart: return "ResizeStart";
        case RecordKind::ResizeDone: return "ResizeDone";
        case RecordKind::JobDone: return "JobDone";
    }
    return "?";
}

Simulation::Simulation(const workload::Workload& w, EngineConfig config)
    : config_(std::move(config)), cluster_(config_.total_nodes, config_.ranks_per_node) {
    if (w.jobs.empty()) throw Error("simulation needs at least one job");
    config_.costs.validate();
    trace_.total_nodes = config_.total_nodes;
    jobs_.reserve(w.jobs.size());
    for (const auto& spec : w.jobs) {
        spec.validate();
        if (!config_.profiles.contains(spec.jtype))
            throw Error("no scalability profile for " + std::string(to_string(spec.jtype)));
        if (spec.min_nodes < config_.profiles.at(spec.jtype).base_nodes())
            throw scalability::BelowMinimum("job " + std::to_string(spec.id) +
                                            " min_nodes below the profile minimum");
        if (!index_.emplace(spec.id, jobs_.size()).second)
            throw Error("duplicate job id " + std::to_string(spec.id));
        JobState js;
        js.spec = spec;
        jobs_.push_back(js);
        trace_.jobs.push_back(JobRecord{spec});
        trace_.last_arrival = std::max(trace_.last_arrival, spec.submit_time);
    }
    start_nodes_.assign(jobs_.size(), 0);
    alloc_since_.assign(jobs_.size(), 0.0);
    arrivals_left_ = jobs_.size();
    for (const auto& js : jobs_) push(js.spec.submit_time, EventKind::Arrival, js.spec.id);
}

void Simulation::push(Seconds t, EventKind kind, JobId job) {
    events_.push(Event{t, kind, job, next_seq_++});
}

void Simulation::log(RecordKind kind, JobId job, int before, int after) {
    trace_.records.push_back({clock_.now(), kind, job, before, after});
}

void Simulation::snapshot() {
    AllocationSnapshot s{clock_.now(), cluster_.allocations(), cluster_.allocated_nodes()};
    if (!trace_.snapshots.empty() && trace_.snapshots.back().time == s.time)
        trace_.snapshots.back() = std::move(s);
    else
        trace_.snapshots.push_back(std::move(s));
}

std::size_t Simulation::index_of(JobId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownJob("job " + std::to_string(id));
    return it->second;
}

void Simulation::set_allocation(JobState& job, int nodes) {
    const std::size_t i = index_of(job.spec.id);
    const int held = cluster_.nodes_of(job.spec.id);
    trace_.jobs[i].node_seconds += double(held) * (clock_.now() - alloc_since_[i]);
    alloc_since_[i] = clock_.now();
    if (held == 0)
        cluster_.allocate(job.spec.id, nodes);
    else
        cluster_.apply_allocation(job.spec.id, nodes);
    snapshot();
}

Seconds Simulation::nominal_iteration(const JobState& job) const {
    return scalability::iteration_time(config_.profiles.at(job.spec.jtype), job.current_nodes);
}

void Simulation::schedule_iteration(JobState& job) {
    Seconds dt = nominal_iteration(job);
    if (auto it = open_.find(job.spec.id); it != open_.end())
        dt /= trace_.episodes[it->second.index].plan.overlap_speedup;
    push(clock_.now() + dt, EventKind::IterationEnd, job.spec.id);
}

Event Simulation::step() {
    if (events_.empty()) throw EmptyQueue("no pending events");
    const Event ev = events_.top();
    events_.pop();
    clock_.advance_to(ev.time);
    JobState& job = jobs_[index_of(ev.job)];
    switch (ev.kind) {
        case EventKind::Arrival: on_arrival(job); break;
        case EventKind::IterationEnd: on_iteration_end(job); break;
        case EventKind::ResizeDone: on_resize_done(job); break;
        case EventKind::JobDone: on_job_done(job); break;
    }
    if (arrivals_left_ == 0 && queue_.pending.empty() && !trace_.queue_empty_time)
        trace_.queue_empty_time = clock_.now();
    return ev;
}

void Simulation::run_to_end() {
    while (has_events()) step();
    for (const auto& js : jobs_) {
        if (js.phase != JobPhase::Done)
            throw StalledSimulation("no event left but job " + std::to_string(js.spec.id) +
                                    " is " + std::string(to_string(js.phase)));
    }
}

void Simulation::on_arrival(JobState& job) {
    --arrivals_left_;
    job.phase = JobPhase::Pending;
    queue_.pending.push_back(policy::pending_entry(job.spec));
    log(RecordKind::Arrival, job.spec.id, 0, 0);
    start_pending_jobs();
}

void Simulation::start_pending_jobs() {
    const auto orders = policy::try_start_jobs(queue_, cluster_, clock_.now(), config_.policy);
    for (const auto& o : orders) {
        JobState& job = jobs_[index_of(o.id)];
        std::erase_if(queue_.pending, [&](const policy::PendingJob& p) { return p.id == o.id; });
        queue_.priority_boosts.erase(o.id);
        queue_.reserved.erase(o.id);
        set_allocation(job, o.nodes);
        const std::size_t i = index_of(o.id);
        job.phase = JobPhase::Running;
        job.current_nodes = o.nodes;
        job.inhibit_remaining = 0;
        job.wait_time = clock_.now() - job.spec.submit_time;
        start_nodes_[i] = o.nodes;
        trace_.jobs[i].start = clock_.now();
        log(RecordKind::Start, o.id, 0, o.nodes);
        schedule_iteration(job);
    }
}

void Simulation::on_iteration_end(JobState& job) {
    const std::size_t i = index_of(job.spec.id);
    ++job.iterations_done;
    ++trace_.jobs[i].iterations_logged;
    log(RecordKind::IterationEnd, job.spec.id, job.current_nodes, job.current_nodes);
    const bool finished = job.iterations_done >= job.spec.iterations;

    if (auto it = open_.find(job.spec.id); it != open_.end()) {
        // Background resize: completion is only observed at iteration boundaries.
        ++trace_.episodes[it->second.index].iterations_overlapped;
        if (clock_.now() >= it->second.due)
            push(clock_.now(), EventKind::ResizeDone, job.spec.id);
        else if (finished)
            push(it->second.due, EventKind::ResizeDone, job.spec.id);
        else
            schedule_iteration(job);
        return;
    }

    if (finished) {
        push(clock_.now(), EventKind::JobDone, job.spec.id);
        return;
    }

    if (job.spec.malleable) {
        if (job.inhibit_remaining > 0) {
            --job.inhibit_remaining;
        } else if (open_resize(job)) {
            if (!trace_.episodes[open_.at(job.spec.id).index].plan.config.async) {
                job.phase = JobPhase::Resizing;
                push(open_.at(job.spec.id).due, EventKind::ResizeDone, job.spec.id);
                return;
            }
        }
    }
    schedule_iteration(job);
}

bool Simulation::open_resize(JobState& job) {
    const auto decision = policy::select_natural(job, queue_, cluster_, config_.policy);
    const int target = decision.resultant_nodes;
    if (target == 0 || target == job.current_nodes) return false;

    const std::size_t i = index_of(job.spec.id);
    const int rpn = config_.ranks_per_node;
    const int ns = job.current_nodes * rpn;
    const int nt = target * rpn;
    auto cfg = reconfig::choose_config(ns, nt, start_nodes_[i] * rpn, config_.mam_override);
    if (!config_.mam_override) cfg.async = config_.async_strategy;
    const auto plan =
        reconfig::plan_resize(job_type_info(job.spec.jtype).grid, ns, nt, cfg, config_.costs);

    ResizeEpisode ep;
    ep.job = job.spec.id;
    ep.t_start = clock_.now();
    ep.plan = plan;
    ep.nodes_before = job.current_nodes;
    ep.nodes_after = target;
    ep.released_for = decision.released_for;
    trace_.episodes.push_back(ep);
    open_[job.spec.id] = OpenEpisode{trace_.episodes.size() - 1, clock_.now() + plan.duration(),
                                     target};
    job.resize_in_flight = true;
    ++trace_.jobs[i].resizes;

    // Growth takes its nodes now; a shrink releases them at completion.
    if (target > job.current_nodes) set_allocation(job, target);
    if (decision.released_for) {
        queue_.priority_boosts.insert(*decision.released_for);
        if (decision.reserved_idle > 0) queue_.reserved[*decision.released_for] = decision.reserved_idle;
    }
    log(RecordKind::ResizeStart, job.spec.id, job.current_nodes, target);
    return true;
}

void Simulation::on_resize_done(JobState& job) {
    auto it = open_.find(job.spec.id);
    if (it == open_.end()) throw Error("resize completion without an open resize");
    const OpenEpisode open = it->second;
    open_.erase(it);
    auto& ep = trace_.episodes[open.index];
    ep.t_end = clock_.now();

    const int before = job.current_nodes;
    const bool shrink = open.target_nodes < before;
    if (shrink) set_allocation(job, open.target_nodes);
    job.current_nodes = open.target_nodes;
    job.phase = JobPhase::Running;
    job.resize_in_flight = false;
    job.inhibit_remaining = job.spec.inhibit_window;
    log(RecordKind::ResizeDone, job.spec.id, before, job.current_nodes);

    if (job.iterations_done >= job.spec.iterations)
        push(clock_.now(), EventKind::JobDone, job.spec.id);
    else
        schedule_iteration(job);
    if (shrink) start_pending_jobs();
}

void Simulation::on_job_done(JobState& job) {
    const std::size_t i = index_of(job.spec.id);
    const int before = job.current_nodes;
    set_allocation(job, 0);
    job.phase = JobPhase::Done;
    job.current_nodes = 0;
    job.run_time = clock_.now() - trace_.jobs[i].start;
    trace_.jobs[i].end = clock_.now();
    trace_.jobs[i].done = true;
    log(RecordKind::JobDone, job.spec.id, before, 0);
    start_pending_jobs();
}

SimulationTrace run(const workload::Workload& w, const EngineConfig& config) {
    Simulation sim(w, config);
    sim.run_to_end();
    return sim.take_trace();
}

void write_trace_log(std::ostream& out, const SimulationTrace& trace) {
    out << "time,kind,job,nodes_before,nodes_after\n";
    for (const auto& r : trace.records) {
        out << format_double(r.time) << ',' << to_string(r.kind) << ',' << r.job << ','
            << r.nodes_before << ',' << r.nodes_after << '\n';
    }
}

}  // namespace mallsim::engine
