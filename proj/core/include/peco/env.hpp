#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "peco/tensor.hpp"
#include "peco/workload.hpp"

namespace peco::env {

enum class Tier { local, edge, cloud };

const char* to_string(Tier t);
Tier tier_from_string(const std::string& s);

struct NodeProfile {
    Tier tier = Tier::edge;
    double cpu_capacity = 1.0;   // work units per timestep
    double mem_capacity = 1.0;   // data units
    double link_latency = 0.0;   // timesteps per data unit
    double energy_per_work = 0.0;
    double energy_idle = 0.0;
    double cost_per_work = 0.0;

    bool operator==(const NodeProfile&) const = default;
};

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;

    bool operator==(const Bounds&) const = default;
};

/// Weights and normalization bounds for the scalar reward
///   R = -(w_L*N(L) + w_E*N(E) + w_C*N(C) + w_V*P_SLA*[violated])
struct RewardWeights {
    double w_latency = 1.0;
    double w_energy = 1.0;
    double w_cost = 1.0;
    double w_violation = 1.0;
    double sla_penalty = 10.0;
    Bounds latency_bounds{0.0, 25.0};
    Bounds energy_bounds{0.0, 15.0};
    Bounds cost_bounds{0.0, 40.0};

    void validate() const;
    /// Tightest possible reward: -(w_L + w_E + w_C + w_V*P_SLA).
    double lower_bound() const;
    bool operator==(const RewardWeights&) const = default;
};

/// Min-max normalization clipped to [0,1]. Requires lo < hi.
double normalize(double x, double lo, double hi);
inline double normalize(double x, const Bounds& b) { return normalize(x, b.lo, b.hi); }

/// Offload target plus quantized allocation levels. Level index l in
/// [0, levels) maps to the fraction (l+1)/levels.
struct HybridAction {
    std::size_t target = 0;
    std::vector<std::size_t> levels; // one entry per allocation dimension

    bool operator==(const HybridAction&) const = default;
};

/// Flat-index bijection over (target, allocation-levels) tuples.
class ActionSpace {
public:
    ActionSpace(std::size_t n_targets, std::size_t alloc_dims, std::size_t alloc_levels);

    std::size_t size() const { return size_; }
    std::size_t n_targets() const { return n_targets_; }
    std::size_t alloc_dims() const { return alloc_dims_; }
    std::size_t alloc_levels() const { return alloc_levels_; }

    std::size_t encode(const HybridAction& a) const;
    HybridAction decode(std::size_t flat) const;
    double level_fraction(std::size_t level) const;

private:
    std::size_t n_targets_;
    std::size_t alloc_dims_;
    std::size_t alloc_levels_;
    std::size_t size_;
};

struct EnvConfig {
    std::vector<NodeProfile> nodes; // [local, edge..., cloud]; index = offload target
    RewardWeights reward;
    std::size_t alloc_dims = 1;   // m
    std::size_t alloc_levels = 4; // L
    std::size_t history = 32;     // H raw snapshots kept in the state
    std::size_t steps_per_episode = 200; // T

    // state normalizers for the pending-task descriptor and queue lengths
    double queue_norm = 16.0;
    double work_norm = 10.0;
    double data_norm = 5.0;
    double deadline_norm = 25.0;

    void validate() const;
    std::size_t n_nodes() const { return nodes.size(); }
    /// Features per snapshot: cpu + mem + queue per node, plus congestion.
    std::size_t snapshot_dim() const { return 3 * nodes.size() + 1; }
    /// Full observation: current snapshot + H history snapshots + pending task.
    std::size_t state_dim() const { return snapshot_dim() * (history + 1) + 3; }
    bool operator==(const EnvConfig&) const = default;
};

/// Flat observation vector. Layout:
///   [ current snapshot | H history snapshots, oldest first | pending (work, data, slack) ]
/// where each snapshot is [cpu_0..cpu_{n-1}, mem_0..mem_{n-1}, net, queue_0..queue_{n-1}].
struct RawState {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const RawState&) const = default;
};

/// Per-step measured quantities; the reward is recomputable from these.
struct StepBreakdown {
    double latency = 0.0;    // sum over tasks completed this step of transfer+wait+processing
    double energy = 0.0;     // work-proportional energy + idle energy, all nodes
    double cost = 0.0;       // work-proportional cost, all nodes
    bool sla_violated = false; // any late completion or deadline drop this step
    std::size_t completed = 0; // tasks finished this step (throughput contribution)
    double utilization = 0.0;  // mean node cpu utilization this step
    double makespan = 0.0;     // sum of completion-arrival spans recorded this step
};

struct StepOutcome {
    RawState next_state;
    double reward = 0.0;
    StepBreakdown breakdown;
    bool done = false;
};

double compute_reward(const StepBreakdown& b, const RewardWeights& w);

/// Work-unit accounting; arrived == processed + in_system + dropped holds at
/// every step boundary.
struct WorkAccounting {
    double arrived = 0.0;
    double processed = 0.0;
    double in_system = 0.0;
    double dropped = 0.0;
};

/// Aggregates over one episode, for the Table-2 style metrics.
struct EpisodeStats {
    std::size_t arrived_tasks = 0;
    std::size_t completed_tasks = 0;
    std::size_t dropped_tasks = 0;
    double total_reward = 0.0;
    double latency_sum = 0.0;   // over completed tasks
    double energy_sum = 0.0;    // over steps
    double cost_sum = 0.0;      // over steps
    double utilization_sum = 0.0; // over steps
    double makespan_sum = 0.0;  // completed + dropped + end-of-episode residuals
    std::size_t makespan_count = 0;
    std::size_t violations = 0; // steps with the SLA flag set
    std::size_t steps = 0;
};

/// Tiered edge-cloud simulator. One pending task is offered per step; the
/// action dispatches it to a node with an allocation share. Nodes serve
/// FIFO; the task at the head runs at alloc * cpu_capacity * (1 - background
/// utilization). Transfers take data_size * link_latency * (1 + congestion).
/// Tasks that outlive their deadline before starting service are dropped.
class EdgeCloudEnv {
public:
    explicit EdgeCloudEnv(EnvConfig cfg);

    /// Starts an episode on a T-step slice of `trace`; the slice offset is
    /// derived from episode_seed. Returns the initial observation.
    RawState reset(const workload::WorkloadTrace& trace, std::uint64_t episode_seed);

    StepOutcome step(const HybridAction& action);

    bool done() const { return done_; }
    std::size_t time() const { return t_; }
    const EnvConfig& config() const { return cfg_; }
    const ActionSpace& action_space() const { return actions_; }

    /// Trace-channel window (length x channels, channels = n_locations + 1:
    /// per-location cpu then congestion) ending at the current timestep.
    /// Rows before the trace start repeat the first row. This is the
    /// forecaster's input.
    Tensor series_window(std::size_t length) const;

    WorkAccounting accounting() const;
    const EpisodeStats& episode_stats() const { return stats_; }
    std::size_t slice_offset() const { return offset_; }

private:
    struct SimTask {
        std::size_t uid = 0;
        double arrival = 0.0;    // episode-local time
        double work = 0.0;
        double data = 0.0;
        double deadline = 0.0;   // allowed span before violation
        double remaining = 0.0;
        double dispatch = -1.0;  // time the action dispatched it
        double ready = -1.0;     // arrival time at the node (post transfer)
        double alloc = 0.0;      // allocated capacity fraction
        bool started = false;
    };

    EnvConfig cfg_;
    ActionSpace actions_;

    workload::WorkloadTrace trace_;
    std::size_t offset_ = 0;
    std::size_t t_ = 0;
    bool done_ = true;

    std::deque<SimTask> dispatch_queue_;
    std::vector<std::deque<SimTask>> node_queues_;
    std::deque<std::vector<double>> history_;
    std::vector<double> cur_snapshot_;
    std::vector<double> last_step_util_; // per-node cpu use during the last step
    std::size_t next_arrival_ = 0;       // index into trace_.arrivals
    std::size_t uid_counter_ = 0;

    WorkAccounting acct_;
    EpisodeStats stats_;

    double background(std::size_t node, std::size_t abs_t) const;
    double congestion(std::size_t abs_t) const;
    void enqueue_arrivals(std::size_t local_t);
    std::vector<double> snapshot() const;
    RawState build_state() const;
};

} // namespace peco::env
