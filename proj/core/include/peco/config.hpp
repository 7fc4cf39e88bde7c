#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "peco/agent.hpp"
#include "peco/env.hpp"
#include "peco/forecaster.hpp"
#include "peco/workload.hpp"

namespace peco::config {

enum class Mode { baseline, hybrid };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct TrainSettings {
    Mode mode = Mode::hybrid;
    std::size_t episodes = 300;         // M
    std::size_t steps_per_episode = 200; // T
    std::uint64_t episode_seed = 17;    // seeds the per-episode reset stream
    std::vector<std::uint64_t> eval_seeds{9001, 9002, 9003, 9004, 9005};
    bool audit = false;

    void validate() const;
    bool operator==(const TrainSettings&) const = default;
};

/// The whole experiment: one INI-style file with a section per module.
/// See docs/config.md for the schema and defaults.
struct ExperimentConfig {
    workload::TraceParams trace;
    workload::CongestionParams congestion;
    workload::MobilityParams mobility;
    env::EnvConfig env;             // nodes assembled from [node.*]; steps from [train]
    forecaster::ForecastConfig forecast; // input_channels derived from mobility
    agent::AgentConfig agent;       // state_dim / n_actions derived per mode
    TrainSettings train;
    bool eps_decay_explicit = false; // false: eps_decay follows M*T/5

    void validate() const;
    /// Equality over every resolved value (the eps_decay_explicit marker is
    /// presentation state and excluded).
    bool operator==(const ExperimentConfig& o) const {
        return trace == o.trace && congestion == o.congestion && mobility == o.mobility &&
               env == o.env && forecast == o.forecast && agent == o.agent && train == o.train;
    }
};

/// Built-in defaults (identical to loading an empty file).
ExperimentConfig default_config();

/// Parse + validate + fill defaults. Parse errors carry line numbers;
/// semantic errors name the offending section.key.
ExperimentConfig load_config_text(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical resolved form: every key present, fixed order, deterministic
/// number formatting. load(echo(cfg)) == cfg.
std::string echo_config(const ExperimentConfig& cfg);

/// Replaces every seed in the config with streams derived from `seed`.
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed);

} // namespace peco::config
