#include "peco/env.hpp"

#include <algorithm>
#include <cmath>

#include "peco/errors.hpp"
#include "peco/rng.hpp"

namespace peco::env {

namespace {

constexpr double kEps = 1e-9;

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void require(bool cond, const char* msg) {
    if (!cond) throw InvalidArgument(msg);
}

} // namespace

const char* to_string(Tier t) {
    switch (t) {
        case Tier::local: return "local";
        case Tier::edge: return "edge";
        case Tier::cloud: return "cloud";
    }
    return "?";
}

Tier tier_from_string(const std::string& s) {
    if (s == "local") return Tier::local;
    if (s == "edge") return Tier::edge;
    if (s == "cloud") return Tier::cloud;
    throw InvalidArgument("unknown tier '" + s + "'");
}

double normalize(double x, double lo, double hi) {
    if (!(lo < hi)) throw InvalidArgument("normalize: requires lo < hi");
    return clip01((x - lo) / (hi - lo));
}

void RewardWeights::validate() const {
    require(w_latency >= 0.0 && w_energy >= 0.0 && w_cost >= 0.0 && w_violation >= 0.0,
            "RewardWeights: weights must be >= 0");
    require(sla_penalty >= 0.0, "RewardWeights: sla_penalty must be >= 0");
    require(latency_bounds.lo < latency_bounds.hi, "RewardWeights: latency bounds need min < max");
    require(energy_bounds.lo < energy_bounds.hi, "RewardWeights: energy bounds need min < max");
    require(cost_bounds.lo < cost_bounds.hi, "RewardWeights: cost bounds need min < max");
}

double RewardWeights::lower_bound() const {
    return -(w_latency + w_energy + w_cost + w_violation * sla_penalty);
}

double compute_reward(const StepBreakdown& b, const RewardWeights& w) {
    if (!std::isfinite(b.latency) || !std::isfinite(b.energy) || !std::isfinite(b.cost))
        throw NumericError("compute_reward: non-finite metric");
    return -(w.w_latency * normalize(b.latency, w.latency_bounds) +
             w.w_energy * normalize(b.energy, w.energy_bounds) +
             w.w_cost * normalize(b.cost, w.cost_bounds) +
             w.w_violation * w.sla_penalty * (b.sla_violated ? 1.0 : 0.0));
}

ActionSpace::ActionSpace(std::size_t n_targets, std::size_t alloc_dims, std::size_t alloc_levels)
    : n_targets_(n_targets), alloc_dims_(alloc_dims), alloc_levels_(alloc_levels) {
    require(n_targets >= 1, "ActionSpace: need at least one target");
    require(alloc_dims >= 1, "ActionSpace: need at least one allocation dimension");
    require(alloc_levels >= 1, "ActionSpace: need at least one allocation level");
    std::size_t s = n_targets;
    for (std::size_t i = 0; i < alloc_dims; ++i) {
        require(s < (std::size_t(1) << 40) / alloc_levels, "ActionSpace: too many actions");
        s *= alloc_levels;
    }
    size_ = s;
}

std::size_t ActionSpace::encode(const HybridAction& a) const {
    require(a.target < n_targets_, "encode: target out of range");
    require(a.levels.size() == alloc_dims_, "encode: wrong allocation dimensionality");
    std::size_t flat = a.target;
    for (std::size_t i = alloc_dims_; i-- > 0;) {
        require(a.levels[i] < alloc_levels_, "encode: allocation level out of range");
        flat = flat * alloc_levels_ + a.levels[i];
    }
    return flat;
}

HybridAction ActionSpace::decode(std::size_t flat) const {
    require(flat < size_, "decode: flat index out of range");
    HybridAction a;
    a.levels.resize(alloc_dims_);
    for (std::size_t i = 0; i < alloc_dims_; ++i) {
        a.levels[i] = flat % alloc_levels_;
        flat /= alloc_levels_;
    }
    a.target = flat;
    return a;
}

double ActionSpace::level_fraction(std::size_t level) const {
    require(level < alloc_levels_, "level_fraction: level out of range");
    return double(level + 1) / double(alloc_levels_);
}

void EnvConfig::validate() const {
    require(nodes.size() >= 3, "EnvConfig: need at least local, one edge, and cloud");
    require(nodes.front().tier == Tier::local, "EnvConfig: node 0 must be the local device");
    require(nodes.back().tier == Tier::cloud, "EnvConfig: last node must be the cloud");
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
        require(nodes[i].tier == Tier::edge, "EnvConfig: middle nodes must be edge servers");
    for (const auto& n : nodes) {
        require(n.cpu_capacity > 0.0, "EnvConfig: cpu_capacity must be positive");
        require(n.mem_capacity > 0.0, "EnvConfig: mem_capacity must be positive");
        require(n.link_latency >= 0.0, "EnvConfig: link_latency must be >= 0");
        require(n.energy_per_work >= 0.0 && n.energy_idle >= 0.0 && n.cost_per_work >= 0.0,
                "EnvConfig: energy/cost rates must be >= 0");
    }
    require(nodes.front().link_latency == 0.0,
            "EnvConfig: local device must have zero link latency");
    const NodeProfile& cloud = nodes.back();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        require(cloud.cpu_capacity > nodes[i].cpu_capacity,
                "EnvConfig: cloud must have the highest cpu_capacity");
        require(cloud.link_latency > nodes[i].link_latency,
                "EnvConfig: cloud must have the highest link_latency");
        require(cloud.cost_per_work > nodes[i].cost_per_work,
                "EnvConfig: cloud must have the highest cost_per_work");
    }
    reward.validate();
    require(alloc_dims >= 1, "EnvConfig: alloc_dims must be >= 1");
    require(alloc_levels >= 1, "EnvConfig: alloc_levels must be >= 1");
    require(steps_per_episode >= 1, "EnvConfig: steps_per_episode must be >= 1");
    require(queue_norm > 0.0 && work_norm > 0.0 && data_norm > 0.0 && deadline_norm > 0.0,
            "EnvConfig: state normalizers must be positive");
}

EdgeCloudEnv::EdgeCloudEnv(EnvConfig cfg)
    : cfg_(std::move(cfg)), actions_(cfg_.nodes.size(), cfg_.alloc_dims, cfg_.alloc_levels) {
    cfg_.validate();
}

double EdgeCloudEnv::background(std::size_t node, std::size_t abs_t) const {
    // node 0 = local device, last = cloud: no trace-driven background.
    if (node == 0 || node + 1 == cfg_.nodes.size()) return 0.0;
    const std::size_t loc = node - 1;
    const std::size_t t = std::min(abs_t, trace_.horizon - 1);
    return trace_.cpu_series[loc][t];
}

double EdgeCloudEnv::congestion(std::size_t abs_t) const {
    return trace_.net_series[std::min(abs_t, trace_.horizon - 1)];
}

void EdgeCloudEnv::enqueue_arrivals(std::size_t local_t) {
    const std::size_t abs_t = offset_ + local_t;
    while (next_arrival_ < trace_.arrivals.size() &&
           trace_.arrivals[next_arrival_].arrival_time == abs_t) {
        const auto& a = trace_.arrivals[next_arrival_];
        SimTask task;
        task.uid = uid_counter_++;
        task.arrival = double(local_t);
        task.work = a.work;
        task.data = a.data_size;
        task.deadline = double(a.sla_deadline);
        task.remaining = a.work;
        dispatch_queue_.push_back(task);
        acct_.arrived += a.work;
        ++stats_.arrived_tasks;
        ++next_arrival_;
    }
}

std::vector<double> EdgeCloudEnv::snapshot() const {
    const std::size_t n = cfg_.nodes.size();
    const std::size_t abs_t = offset_ + t_;
    std::vector<double> snap;
    snap.reserve(cfg_.snapshot_dim());
    for (std::size_t i = 0; i < n; ++i)
        snap.push_back(clip01(background(i, abs_t) + last_step_util_[i]));
    for (std::size_t i = 0; i < n; ++i) {
        double mem = 0.0;
        for (const auto& task : node_queues_[i]) mem += task.data;
        snap.push_back(clip01(mem / cfg_.nodes[i].mem_capacity));
    }
    snap.push_back(congestion(abs_t));
    for (std::size_t i = 0; i < n; ++i)
        snap.push_back(clip01(double(node_queues_[i].size()) / cfg_.queue_norm));
    return snap;
}

RawState EdgeCloudEnv::build_state() const {
    RawState s;
    s.values.reserve(cfg_.state_dim());
    s.values.insert(s.values.end(), cur_snapshot_.begin(), cur_snapshot_.end());
    for (const auto& h : history_) s.values.insert(s.values.end(), h.begin(), h.end());
    if (!dispatch_queue_.empty()) {
        const SimTask& p = dispatch_queue_.front();
        s.values.push_back(clip01(p.work / cfg_.work_norm));
        s.values.push_back(clip01(p.data / cfg_.data_norm));
        const double slack = p.arrival + p.deadline - double(t_);
        s.values.push_back(clip01(slack / cfg_.deadline_norm));
    } else {
        s.values.push_back(0.0);
        s.values.push_back(0.0);
        s.values.push_back(0.0);
    }
    return s;
}

RawState EdgeCloudEnv::reset(const workload::WorkloadTrace& trace, std::uint64_t episode_seed) {
    trace.validate();
    require(trace.horizon >= cfg_.steps_per_episode,
            "reset: trace horizon shorter than steps_per_episode");
    require(trace.n_locations() == cfg_.nodes.size() - 2,
            "reset: trace locations must match the number of edge nodes");
    trace_ = trace;
    Rng rng(episode_seed);
    offset_ = std::size_t(rng.integer(trace.horizon - cfg_.steps_per_episode + 1));
    t_ = 0;
    done_ = false;
    dispatch_queue_.clear();
    node_queues_.assign(cfg_.nodes.size(), {});
    last_step_util_.assign(cfg_.nodes.size(), 0.0);
    acct_ = {};
    stats_ = {};
    uid_counter_ = 0;

    // arrivals are sorted; position the cursor at the slice start
    next_arrival_ = std::size_t(
        std::lower_bound(trace_.arrivals.begin(), trace_.arrivals.end(), offset_,
                         [](const workload::TaskArrival& a, std::size_t t) {
                             return a.arrival_time < t;
                         }) -
        trace_.arrivals.begin());
    enqueue_arrivals(0);

    cur_snapshot_ = snapshot();
    history_.assign(cfg_.history, cur_snapshot_);
    return build_state();
}

StepOutcome EdgeCloudEnv::step(const HybridAction& action) {
    if (done_) throw StateError("step: episode is done; call reset");
    if (action.target >= cfg_.nodes.size())
        throw InvalidArgument("step: target node index out of range");
    if (action.levels.size() != cfg_.alloc_dims)
        throw InvalidArgument("step: allocation dimensionality mismatch");
    for (std::size_t l : action.levels)
        if (l >= cfg_.alloc_levels) throw InvalidArgument("step: allocation level out of range");

    const std::size_t abs_t = offset_ + t_;
    const double t_start = double(t_);
    const double t_end = t_start + 1.0;
    const double net = congestion(abs_t);

    StepBreakdown bd;

    // 1. dispatch the pending task
    if (!dispatch_queue_.empty()) {
        SimTask task = dispatch_queue_.front();
        dispatch_queue_.pop_front();
        task.dispatch = t_start;
        task.alloc = actions_.level_fraction(action.levels[0]);
        double transfer = task.data * cfg_.nodes[action.target].link_latency * (1.0 + net);
        if (cfg_.alloc_dims >= 2) {
            // second allocation dimension is a bandwidth share
            transfer /= actions_.level_fraction(action.levels[1]);
        }
        task.ready = t_start + transfer;
        auto& q = node_queues_[action.target];
        auto pos = std::upper_bound(q.begin(), q.end(), task.ready,
                                    [](double r, const SimTask& t) { return r < t.ready; });
        q.insert(pos, task);
    }

    // 2. advance node processing over [t, t+1)
    const std::size_t n = cfg_.nodes.size();
    for (std::size_t node = 0; node < n; ++node) {
        const NodeProfile& prof = cfg_.nodes[node];
        const double avail = prof.cpu_capacity * (1.0 - background(node, abs_t));
        auto& q = node_queues_[node];
        double now = t_start;
        double work_done = 0.0;
        while (!q.empty() && now < t_end) {
            SimTask& head = q.front();
            if (head.ready > now) {
                if (head.ready >= t_end) break;
                now = head.ready;
            }
            const double rate = head.alloc * avail;
            if (rate <= 1e-12) break; // background load saturates the node this step
            const double budget = rate * (t_end - now);
            if (head.remaining <= budget) {
                const double delta = head.remaining;
                const double finish = now + delta / rate;
                work_done += delta;
                acct_.processed += delta;
                head.remaining = 0.0;
                bd.energy += prof.energy_per_work * delta;
                bd.cost += prof.cost_per_work * delta;
                const double latency = finish - head.dispatch;
                const double span = finish - head.arrival;
                bd.latency += latency;
                bd.makespan += span;
                bd.completed += 1;
                stats_.latency_sum += latency;
                stats_.makespan_sum += span;
                stats_.makespan_count += 1;
                stats_.completed_tasks += 1;
                if (span > head.deadline + kEps) bd.sla_violated = true;
                now = finish;
                q.pop_front();
            } else {
                const double delta = budget;
                head.remaining -= delta;
                head.started = true;
                work_done += delta;
                acct_.processed += delta;
                bd.energy += prof.energy_per_work * delta;
                bd.cost += prof.cost_per_work * delta;
                now = t_end;
            }
        }
        last_step_util_[node] = work_done / prof.cpu_capacity;
        bd.utilization += clip01(background(node, abs_t) + last_step_util_[node]);
        bd.energy += prof.energy_idle;
    }
    bd.utilization /= double(n);

    // 3. drop tasks whose deadline expired before they started service
    const double now_end = t_end;
    auto expired = [&](const SimTask& task) {
        return !task.started && task.remaining > 0.0 &&
               now_end - task.arrival > task.deadline + kEps;
    };
    auto drop_from = [&](std::deque<SimTask>& q) {
        for (auto it = q.begin(); it != q.end();) {
            if (expired(*it)) {
                acct_.dropped += it->remaining;
                bd.sla_violated = true;
                bd.makespan += now_end - it->arrival;
                stats_.makespan_sum += now_end - it->arrival;
                stats_.makespan_count += 1;
                stats_.dropped_tasks += 1;
                it = q.erase(it);
            } else {
                ++it;
            }
        }
    };
    drop_from(dispatch_queue_);
    for (auto& q : node_queues_) drop_from(q);

    // 4. next arrivals, time advance
    if (t_ + 1 < cfg_.steps_per_episode) enqueue_arrivals(t_ + 1);
    history_.push_back(cur_snapshot_);
    if (history_.size() > cfg_.history) history_.pop_front();
    t_ += 1;
    done_ = (t_ == cfg_.steps_per_episode);

    if (done_) {
        // tasks still in the system contribute their accumulated span
        auto residual = [&](const std::deque<SimTask>& q) {
            for (const auto& task : q) {
                bd.makespan += double(t_) - task.arrival;
                stats_.makespan_sum += double(t_) - task.arrival;
                stats_.makespan_count += 1;
            }
        };
        residual(dispatch_queue_);
        for (const auto& q : node_queues_) residual(q);
    }

    cur_snapshot_ = snapshot();

    StepOutcome out;
    out.breakdown = bd;
    out.reward = compute_reward(bd, cfg_.reward);
    out.done = done_;
    out.next_state = build_state();

    stats_.total_reward += out.reward;
    stats_.energy_sum += bd.energy;
    stats_.cost_sum += bd.cost;
    stats_.utilization_sum += bd.utilization;
    stats_.violations += bd.sla_violated ? 1 : 0;
    stats_.steps += 1;
    return out;
}

Tensor EdgeCloudEnv::series_window(std::size_t length) const {
    require(length >= 1, "series_window: length must be >= 1");
    if (trace_.horizon == 0) throw StateError("series_window: call reset first");
    const std::size_t channels = trace_.n_locations() + 1;
    Tensor w = Tensor::zeros({channels, length});
    const std::size_t cur = std::min(offset_ + t_, trace_.horizon - 1);
    for (std::size_t i = 0; i < length; ++i) {
        // rows before the trace start repeat the first row
        const std::size_t want = length - 1 - i;
        const std::size_t abs_t = cur >= want ? cur - want : 0;
        for (std::size_t c = 0; c < trace_.n_locations(); ++c)
            w.at(c, i) = trace_.cpu_series[c][abs_t];
        w.at(channels - 1, i) = trace_.net_series[abs_t];
    }
    return w;
}

WorkAccounting EdgeCloudEnv::accounting() const {
    WorkAccounting a = acct_;
    double in_system = 0.0;
    for (const auto& task : dispatch_queue_) in_system += task.remaining;
    for (const auto& q : node_queues_)
        for (const auto& task : q) in_system += task.remaining;
    a.in_system = in_system;
    return a;
}

} // namespace peco::env
