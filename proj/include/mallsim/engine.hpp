#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <string_view>
#include <vector>

#include "mallsim/model.hpp"
#include "mallsim/policy.hpp"
#include "mallsim/reconfig.hpp"
#include "mallsim/scalability.hpp"
#include "mallsim/workload.hpp"

namespace mallsim::engine {

class EmptyQueue : public Error {
public:
    using Error::Error;
};

class StalledSimulation : public Error {
public:
    using Error::Error;
};

enum class EventKind { Arrival, IterationEnd, ResizeDone, JobDone };

struct Event {
    Seconds time = 0.0;
    EventKind kind = EventKind::Arrival;
    JobId job = 0;
    std::uint64_t seq = 0;
};

/// Kinds that appear in the exported log; Start and ResizeStart are
/// bookkeeping emitted while handling the queued events above.
enum class RecordKind { Arrival, Start, IterationEnd, ResizeStart, ResizeDone, JobDone };

std::string_view to_string(RecordKind k);

struct TraceRecord {
    Seconds time = 0.0;
    RecordKind kind = RecordKind::Arrival;
    JobId job = 0;
    int nodes_before = 0;
    int nodes_after = 0;

    bool operator==(const TraceRecord&) const = default;
};

struct AllocationSnapshot {
    Seconds time = 0.0;
    std::map<JobId, int> nodes;
    int allocated = 0;

    bool operator==(const AllocationSnapshot&) const = default;
};

struct ResizeEpisode {
    JobId job = 0;
    Seconds t_start = 0.0;
    Seconds t_end = 0.0;
    reconfig::ReconfigPlan plan;
    int nodes_before = 0;
    int nodes_after = 0;
    int iterations_overlapped = 0;
    std::optional<JobId> released_for;

    Seconds duration() const { return t_end - t_start; }
};

struct JobRecord {
    JobSpec spec;
    Seconds start = 0.0;
    Seconds end = 0.0;
    int iterations_logged = 0;
    int resizes = 0;
    double node_seconds = 0.0;  // integral of the job's allocation over time
    bool done = false;
};

struct SimulationTrace {
    int total_nodes = 0;
    std::vector<TraceRecord> records;
    std::vector<AllocationSnapshot> snapshots;  // one per allocation change
    std::vector<ResizeEpisode> episodes;        // in opening order
    std::vector<JobRecord> jobs;                // workload order
    Seconds last_arrival = 0.0;
    std::optional<Seconds> queue_empty_time;    // first empty queue after all arrivals
};

struct EngineConfig {
    int total_nodes = 31;
    int ranks_per_node = 112;
    policy::PolicyConfig policy;
    /// Forces the MaM configuration of every resize; empty lets the engine choose.
    std::optional<reconfig::MamConfig> mam_override;
    /// Background resizing when the engine chooses the configuration itself.
    bool async_strategy = false;
    reconfig::CostParams costs;
    scalability::ProfileSet profiles = scalability::default_profiles();
};

/// Event-by-event simulation of one workload on one cluster.
class Simulation {
public:
    Simulation(const workload::Workload& w, EngineConfig config);

    bool has_events() const { return !events_.empty(); }
    /// Processes exactly one event and returns it.
    Event step();
    /// Processes every remaining event; throws StalledSimulation when jobs
    /// are left unfinished.
    void run_to_end();

    Seconds now() const { return clock_.now(); }
    const ClusterState& cluster() const { return cluster_; }
    const policy::QueueState& queue() const { return queue_; }
    const std::vector<JobState>& jobs() const { return jobs_; }
    const SimulationTrace& trace() const { return trace_; }
    SimulationTrace take_trace() { return std::move(trace_); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };
    struct OpenEpisode {
        std::size_t index = 0;  // into trace_.episodes
        Seconds due = 0.0;
        int target_nodes = 0;
    };

    void push(Seconds t, EventKind kind, JobId job);
    void log(RecordKind kind, JobId job, int before, int after);
    void snapshot();
    void set_allocation(JobState& job, int nodes);
    std::size_t index_of(JobId id) const;

    void on_arrival(JobState& job);
    void on_iteration_end(JobState& job);
    void on_resize_done(JobState& job);
    void on_job_done(JobState& job);
    void start_pending_jobs();
    bool open_resize(JobState& job);
    void schedule_iteration(JobState& job);
    Seconds nominal_iteration(const JobState& job) const;

    EngineConfig config_;
    ClusterState cluster_;
    SimClock clock_;
    policy::QueueState queue_;
    std::vector<JobState> jobs_;
    std::vector<int> start_nodes_;
    std::vector<Seconds> alloc_since_;
    std::map<JobId, std::size_t> index_;
    std::map<JobId, OpenEpisode> open_;
    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::uint64_t next_seq_ = 0;
    std::size_t arrivals_left_ = 0;
    SimulationTrace trace_;
};

SimulationTrace run(const workload::Workload& w, const EngineConfig& config);

/// One record per line: `time,kind,job,nodes_before,nodes_after`.
void write_trace_log(std::ostream& out, const SimulationTrace& trace);

}  // namespace mallsim::engine
