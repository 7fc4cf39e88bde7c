#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "peco/agent.hpp"
#include "peco/config.hpp"
#include "peco/env.hpp"
#include "peco/forecaster.hpp"
#include "peco/workload.hpp"

namespace peco::trainer {

struct EpisodeRow {
    std::size_t episode = 0;
    double reward = 0.0;       // sum of step rewards
    double latency = 0.0;      // mean latency of completed tasks
    double energy = 0.0;       // mean energy per step
    double cost = 0.0;         // mean cost per step
    double throughput = 0.0;   // completed tasks / T
    double utilization = 0.0;  // mean node utilization
    double makespan = 0.0;     // mean completion-arrival span
    double epsilon = 0.0;
    double td_loss = 0.0;      // mean TD loss over learn calls (0 before learning starts)
};

/// The Table-2 metric set, one value per metric.
struct MetricVector {
    double total_reward = 0.0;
    double avg_latency = 0.0;
    double avg_energy = 0.0;
    double avg_cost = 0.0;
    double throughput = 0.0;
    double utilization = 0.0;
    double avg_makespan = 0.0;
};

/// Metric names in canonical artifact order.
const std::vector<std::string>& metric_names();
double metric_value(const MetricVector& m, std::size_t index);
bool metric_higher_is_better(std::size_t index);

struct EvalSummary {
    config::Mode mode = config::Mode::hybrid;
    std::vector<std::uint64_t> seeds;
    std::vector<MetricVector> per_seed; // sorted by seed
    MetricVector mean;
    MetricVector stddev; // population std over seeds
};

/// One sampled step from hybrid training, for the extended-state audit.
struct AuditRecord {
    std::size_t episode = 0;
    std::size_t step = 0;
    std::vector<double> raw_state;
    Tensor window;               // forecaster input logged at that step
    std::vector<double> extended_state;
};

struct TrainingReport {
    config::Mode mode = config::Mode::hybrid;
    std::vector<EpisodeRow> episodes;
    EvalSummary eval;
    // phase-1 artifacts (hybrid only)
    std::vector<forecaster::EpochLoss> forecaster_curve;
    double forecaster_val_mse = 0.0;
    double persistence_val_mse = 0.0;
    // audit-mode evidence
    std::vector<AuditRecord> audit;
    bool transitions_consistent = true;
    std::size_t audited_transitions = 0;
};

struct TrainedArtifacts {
    TrainingReport report;
    agent::DdqnAgent agent;
    std::optional<nn::Network> forecaster_net;
};

/// Phase 1 alone: generates the disjoint-seed history trace and pre-trains
/// the forecaster on it. train_hybrid runs exactly this before Phase 2.
forecaster::PretrainResult pretrain_forecaster(const config::ExperimentConfig& cfg);

/// Phase 1 (forecaster pre-training on a disjoint-seed trace) followed by
/// Phase 2 (DDQN training on the extended state), then a frozen greedy
/// evaluation over the config's seeds.
TrainedArtifacts train_hybrid(const config::ExperimentConfig& cfg);

/// Reactive baseline: raw state only, offload-target actions only, the
/// allocation pinned at the mid level.
TrainedArtifacts train_baseline(const config::ExperimentConfig& cfg);

/// Frozen greedy policy (epsilon = 0) on each seed; aggregates the metric set.
EvalSummary evaluate(const agent::DdqnAgent& agent, const nn::Network* forecaster_net,
                     const config::ExperimentConfig& cfg, config::Mode mode,
                     const std::vector<std::uint64_t>& seeds);

enum class Direction { hybrid_better, baseline_better, tie };
const char* to_string(Direction d);

struct ComparisonRow {
    std::string metric;
    double baseline = 0.0;
    double hybrid_mean = 0.0;
    double hybrid_std = 0.0;
    Direction direction = Direction::tie;
};

struct ComparisonSummary {
    std::vector<ComparisonRow> rows; // one per metric, canonical order
};

/// Per-metric direction flags; both summaries must come from identical
/// evaluation seeds.
ComparisonSummary compare(const EvalSummary& baseline, const EvalSummary& hybrid);
ComparisonSummary compare(const TrainingReport& baseline, const TrainingReport& hybrid);

/// Aligned plain-text table of the comparison.
std::string comparison_table(const ComparisonSummary& cmp);

/// The trace-derived mid allocation level used by the baseline: ceil(L/2)/L.
std::size_t baseline_alloc_level(std::size_t alloc_levels);

// Artifact writers (schemas in docs/formats.md).
void write_metrics_csv(const TrainingReport& report, const std::filesystem::path& path);
void write_evaluation_json(const EvalSummary& summary, const std::filesystem::path& path);
EvalSummary read_evaluation_json(const std::filesystem::path& path);

} // namespace peco::trainer
