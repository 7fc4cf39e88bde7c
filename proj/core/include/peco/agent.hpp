#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "peco/nn.hpp"
#include "peco/rng.hpp"

namespace peco::agent {

struct AgentConfig {
    std::size_t state_dim = 0;
    std::size_t n_actions = 0;
    std::vector<std::size_t> hidden{128, 128};
    double gamma = 0.99;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay = 12000.0; // steps; schedule eps_end + (eps_start-eps_end)*exp(-step/decay)
    double tau = 0.005;
    std::size_t capacity = 50000;
    std::size_t batch_size = 64;
    std::size_t learn_start = 500;
    double lr = 1e-3;
    std::uint64_t seed = 11; // weight init

    void validate() const;
    /// Checks everything except the derived state_dim / n_actions.
    void validate_hyper() const;
    bool operator==(const AgentConfig&) const = default;
};

struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

/// Fixed-capacity ring buffer with strict FIFO eviction; uniform sampling
/// with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void store(Transition t);
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
    const Transition& operator[](std::size_t i) const { return items_[i]; }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// Logical order: index 0 is the oldest stored transition.
    const Transition& oldest_first(std::size_t i) const;

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
    std::size_t write_ = 0; // next slot once the buffer is full
};

/// ε schedule: eps_end + (eps_start - eps_end) * exp(-step / eps_decay).
double decay_epsilon(const AgentConfig& cfg, double step);

/// The DDQN target rule on precomputed Q matrices: the ONLINE network picks
/// the argmax action at s', the TARGET network supplies its value.
///   y_j = r_j                                  if done_j
///   y_j = r_j + gamma * Qt[j][argmax_a Qo[j][a]]  otherwise
/// Ties in the argmax break toward the lowest action index.
std::vector<double> ddqn_targets_from_q(const Tensor& q_online_next, const Tensor& q_target_next,
                                        std::span<const double> rewards,
                                        std::span<const std::uint8_t> dones, double gamma);

/// Double-DQN agent: online/target network pair, replay buffer, ε-greedy
/// policy over flat action indices, soft target updates.
class DdqnAgent {
public:
    explicit DdqnAgent(AgentConfig cfg);
    /// Custom value network (tests, experiments). target starts as a copy.
    DdqnAgent(AgentConfig cfg, nn::Network online);

    const AgentConfig& config() const { return cfg_; }
    const nn::Network& online() const { return online_; }
    const nn::Network& target() const { return target_; }
    ReplayBuffer& buffer() { return buffer_; }
    const ReplayBuffer& buffer() const { return buffer_; }

    /// ε-greedy over Q_online(s); argmax ties break to the lowest index.
    std::size_t select_action(std::span<const double> state, double epsilon, Rng& rng) const;

    void store(Transition t);
    bool ready_to_learn() const { return buffer_.size() >= cfg_.learn_start; }

    std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

    /// Targets for a batch via the two-network rule above.
    std::vector<double> ddqn_targets(std::span<const Transition* const> batch) const;

    /// One Adam step on the mean squared TD error; the gradient flows only
    /// through Q_online(s_j, a_j). Returns the pre-step loss.
    double learn(std::span<const Transition* const> batch);

    /// θ' ← τ·θ + (1-τ)·θ'
    void soft_update(double tau);
    void soft_update() { soft_update(cfg_.tau); }

    void save(const std::filesystem::path& path, std::uint64_t epsilon_step = 0) const;
    static DdqnAgent load(const std::filesystem::path& path, std::uint64_t* epsilon_step = nullptr);

private:
    AgentConfig cfg_;
    nn::Network online_;
    nn::Network target_;
    ReplayBuffer buffer_;
};

/// The default Q-network: dense(state->h1) relu dense(h1->h2) relu dense(h2->n_actions).
nn::Network build_q_network(const AgentConfig& cfg);

} // namespace peco::agent
