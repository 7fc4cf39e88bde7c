#include "peco/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "peco/errors.hpp"

namespace peco::agent {

using json = nlohmann::json;

void AgentConfig::validate() const {
    if (state_dim == 0) throw InvalidArgument("AgentConfig: state_dim must be positive");
    if (n_actions == 0) throw InvalidArgument("AgentConfig: n_actions must be positive");
    validate_hyper();
}

void AgentConfig::validate_hyper() const {
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw InvalidArgument("AgentConfig: discount gamma must satisfy 0 <= gamma < 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("AgentConfig: tau must be in [0,1]");
    if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0))
        throw InvalidArgument("AgentConfig: epsilon must be in [0,1]");
    if (!(eps_decay > 0.0)) throw InvalidArgument("AgentConfig: eps_decay must be positive");
    if (capacity == 0) throw InvalidArgument("AgentConfig: capacity must be positive");
    if (batch_size == 0) throw InvalidArgument("AgentConfig: batch_size must be positive");
    if (capacity < batch_size)
        throw InvalidArgument("AgentConfig: capacity must be >= batch_size");
    if (!(lr > 0.0)) throw InvalidArgument("AgentConfig: lr must be positive");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("ReplayBuffer: capacity must be positive");
    items_.reserve(capacity);
}

void ReplayBuffer::store(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[write_] = std::move(t);
        write_ = (write_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::oldest_first(std::size_t i) const {
    if (i >= items_.size()) throw InvalidArgument("ReplayBuffer: index out of range");
    if (items_.size() < capacity_) return items_[i];
    return items_[(write_ + i) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
    if (items_.size() < n)
        throw InsufficientData("ReplayBuffer: cannot sample " + std::to_string(n) + " from " +
                               std::to_string(items_.size()) + " stored transitions");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = std::size_t(rng.integer(items_.size()));
    return idx;
}

double decay_epsilon(const AgentConfig& cfg, double step) {
    if (step < 0.0) throw InvalidArgument("decay_epsilon: step must be >= 0");
    return cfg.eps_end + (cfg.eps_start - cfg.eps_end) * std::exp(-step / cfg.eps_decay);
}

std::vector<double> ddqn_targets_from_q(const Tensor& q_online_next, const Tensor& q_target_next,
                                        std::span<const double> rewards,
                                        std::span<const std::uint8_t> dones, double gamma) {
    if (q_online_next.rank() != 2 || !q_online_next.same_shape(q_target_next))
        throw ShapeError("ddqn_targets_from_q: Q matrices must be (B x A) and match");
    const std::size_t B = q_online_next.dim(0), A = q_online_next.dim(1);
    if (rewards.size() != B || dones.size() != B)
        throw ShapeError("ddqn_targets_from_q: batch size mismatch");
    std::vector<double> y(B);
    for (std::size_t j = 0; j < B; ++j) {
        if (dones[j]) {
            y[j] = rewards[j];
            continue;
        }
        std::size_t best = 0;
        for (std::size_t a = 1; a < A; ++a)
            if (q_online_next.at(j, a) > q_online_next.at(j, best)) best = a;
        const double q = q_target_next.at(j, best);
        if (!std::isfinite(q)) throw NumericError("ddqn_targets_from_q: non-finite Q value");
        y[j] = rewards[j] + gamma * q;
    }
    return y;
}

nn::Network build_q_network(const AgentConfig& cfg) {
    std::vector<nn::LayerSpec> specs;
    std::size_t in = cfg.state_dim;
    for (std::size_t h : cfg.hidden) {
        specs.push_back(nn::LayerSpec::Dense(in, h));
        specs.push_back(nn::LayerSpec::Act(nn::Activation::relu));
        in = h;
    }
    specs.push_back(nn::LayerSpec::Dense(in, cfg.n_actions));
    nn::Network net(std::move(specs));
    net.init_params(cfg.seed);
    return net;
}

DdqnAgent::DdqnAgent(AgentConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      online_(build_q_network(cfg_)),
      target_(online_),
      buffer_(cfg_.capacity) {}

DdqnAgent::DdqnAgent(AgentConfig cfg, nn::Network online)
    : cfg_((cfg.validate(), cfg)),
      online_(std::move(online)),
      target_(online_),
      buffer_(cfg_.capacity) {}

std::size_t DdqnAgent::select_action(std::span<const double> state, double epsilon,
                                     Rng& rng) const {
    if (state.size() != cfg_.state_dim)
        throw ShapeError("select_action: state has dim " + std::to_string(state.size()) +
                         ", expected " + std::to_string(cfg_.state_dim));
    if (epsilon < 0.0 || epsilon > 1.0)
        throw InvalidArgument("select_action: epsilon must be in [0,1]");
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        return std::size_t(rng.integer(cfg_.n_actions));
    Tensor x({1, cfg_.state_dim}, std::vector<double>(state.begin(), state.end()));
    const Tensor q = online_.forward(x);
    std::size_t best = 0;
    for (std::size_t a = 1; a < cfg_.n_actions; ++a)
        if (q.at(0, a) > q.at(0, best)) best = a;
    return best;
}

void DdqnAgent::store(Transition t) {
    if (t.state.size() != cfg_.state_dim || t.next_state.size() != cfg_.state_dim)
        throw ShapeError("store: transition state dims do not match the agent");
    if (t.action >= cfg_.n_actions) throw InvalidArgument("store: action index out of range");
    if (!std::isfinite(t.reward)) throw NumericError("store: non-finite reward");
    buffer_.store(std::move(t));
}

std::vector<const Transition*> DdqnAgent::sample(std::size_t n, Rng& rng) const {
    const auto idx = buffer_.sample_indices(n, rng);
    std::vector<const Transition*> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i] = &buffer_[idx[i]];
    return batch;
}

namespace {

Tensor stack_states(std::span<const Transition* const> batch, bool next, std::size_t dim) {
    Tensor x = Tensor::zeros({batch.size(), dim});
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& v = next ? batch[i]->next_state : batch[i]->state;
        std::copy(v.begin(), v.end(), x.data.begin() + i * dim);
    }
    return x;
}

} // namespace

std::vector<double> DdqnAgent::ddqn_targets(std::span<const Transition* const> batch) const {
    if (batch.empty()) throw InvalidArgument("ddqn_targets: empty batch");
    const Tensor next = stack_states(batch, true, cfg_.state_dim);
    const Tensor q_online = online_.forward(next);
    const Tensor q_target = target_.forward(next);
    std::vector<double> rewards(batch.size());
    std::vector<std::uint8_t> dones(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        rewards[i] = batch[i]->reward;
        dones[i] = batch[i]->done ? 1 : 0;
    }
    return ddqn_targets_from_q(q_online, q_target, rewards, dones, cfg_.gamma);
}

double DdqnAgent::learn(std::span<const Transition* const> batch) {
    const std::vector<double> y = ddqn_targets(batch);
    const Tensor states = stack_states(batch, false, cfg_.state_dim);
    nn::ForwardCache cache;
    const Tensor q = online_.forward(states, &cache);

    // loss = mean_j (y_j - Q(s_j, a_j))^2; targets are constants
    const std::size_t B = batch.size();
    Tensor grad = Tensor::zeros(q.shape);
    double loss = 0.0;
    for (std::size_t j = 0; j < B; ++j) {
        const double err = q.at(j, batch[j]->action) - y[j];
        loss += err * err;
        grad.at(j, batch[j]->action) = 2.0 * err / double(B);
    }
    loss /= double(B);
    if (!std::isfinite(loss)) throw NumericError("learn: non-finite TD loss");

    online_.adam_step(online_.backward(cache, grad), {cfg_.lr, 0.9, 0.999, 1e-8});
    return loss;
}

void DdqnAgent::soft_update(double tau) { target_.blend_from(online_, tau); }

void DdqnAgent::save(const std::filesystem::path& path, std::uint64_t epsilon_step) const {
    json j;
    j["format"] = "peco-agent";
    j["version"] = 1;
    j["config"] = {
        {"state_dim", cfg_.state_dim},   {"n_actions", cfg_.n_actions},
        {"hidden", cfg_.hidden},         {"gamma", cfg_.gamma},
        {"eps_start", cfg_.eps_start},   {"eps_end", cfg_.eps_end},
        {"eps_decay", cfg_.eps_decay},   {"tau", cfg_.tau},
        {"capacity", cfg_.capacity},     {"batch_size", cfg_.batch_size},
        {"learn_start", cfg_.learn_start}, {"lr", cfg_.lr},
        {"seed", cfg_.seed},
    };
    j["epsilon_step"] = epsilon_step;
    j["online"] = json::parse(nn::network_to_json(online_));
    j["target"] = json::parse(nn::network_to_json(target_));
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

DdqnAgent DdqnAgent::load(const std::filesystem::path& path, std::uint64_t* epsilon_step) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("agent checkpoint parse error: " + std::string(e.what()));
    }
    if (j.value("format", "") != "peco-agent")
        throw IoError(path.string() + ": not a peco-agent checkpoint");
    AgentConfig cfg;
    try {
        const json& c = j.at("config");
        cfg.state_dim = c.at("state_dim").get<std::size_t>();
        cfg.n_actions = c.at("n_actions").get<std::size_t>();
        cfg.hidden = c.at("hidden").get<std::vector<std::size_t>>();
        cfg.gamma = c.at("gamma").get<double>();
        cfg.eps_start = c.at("eps_start").get<double>();
        cfg.eps_end = c.at("eps_end").get<double>();
        cfg.eps_decay = c.at("eps_decay").get<double>();
        cfg.tau = c.at("tau").get<double>();
        cfg.capacity = c.at("capacity").get<std::size_t>();
        cfg.batch_size = c.at("batch_size").get<std::size_t>();
        cfg.learn_start = c.at("learn_start").get<std::size_t>();
        cfg.lr = c.at("lr").get<double>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw IoError("agent checkpoint config error: " + std::string(e.what()));
    }
    nn::Network online = nn::network_from_json(j.at("online").dump());
    nn::Network target = nn::network_from_json(j.at("target").dump());

    // dimension gate: the policy head must match the declared config
    const nn::Network expected = build_q_network(cfg);
    if (!online.same_architecture(expected) || !target.same_architecture(expected))
        throw IoError(path.string() + ": checkpoint architecture does not match its config");

    DdqnAgent agent(cfg, std::move(online));
    agent.target_ = std::move(target);
    if (epsilon_step) *epsilon_step = j.value("epsilon_step", std::uint64_t(0));
    return agent;
}

} // namespace peco::agent
