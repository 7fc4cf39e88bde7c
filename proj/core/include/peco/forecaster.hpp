#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "peco/env.hpp"
#include "peco/nn.hpp"
#include "peco/tensor.hpp"
#include "peco/workload.hpp"

namespace peco::forecaster {

struct ForecastConfig {
    std::size_t history_window = 32; // H
    std::size_t horizon = 4;         // k steps ahead
    std::size_t input_channels = 3;  // per-location cpu + congestion
    std::size_t conv_channels = 16;
    std::size_t kernel_width = 5;
    std::size_t lstm_hidden = 32;
    std::size_t train_epochs = 40;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 7; // weight init + shuffling

    void validate() const;
    bool operator==(const ForecastConfig&) const = default;
};

/// Sliding windows over the trace channels with an 80/20 contiguous
/// train/validation split. windows: (n, channels, H); targets: (n, k*channels)
/// flattened step-major (step 0 channels, step 1 channels, ...).
struct HistoryDataset {
    Tensor windows;
    Tensor targets;
    std::size_t train_count = 0;

    std::size_t size() const { return windows.shape.empty() ? 0 : windows.dim(0); }
    std::size_t validation_count() const { return size() - train_count; }
};

/// k-step-ahead prediction, one row per future step.
struct Forecast {
    std::size_t horizon = 0;
    std::size_t channels = 0;
    std::vector<double> values; // (horizon x channels), step-major

    double at(std::size_t step, std::size_t channel) const {
        return values[step * channels + channel];
    }
};

struct EpochLoss {
    std::size_t epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct PretrainResult {
    nn::Network net;
    std::vector<EpochLoss> curve;
    double final_val_mse = 0.0;
    double persistence_val_mse = 0.0;
};

/// The CNN-LSTM stack: conv1d(channels -> conv_channels) + relu ->
/// lstm(lstm_hidden) -> dense(k*channels).
nn::Network build_network(const ForecastConfig& cfg);

HistoryDataset build_dataset(const workload::WorkloadTrace& trace, const ForecastConfig& cfg);

/// Phase-1 training: Adam on MSE with per-epoch shuffling; keeps the
/// best-validation parameters (early-stopping checkpointing). With zero
/// epochs the freshly initialized network is returned untrained.
PretrainResult pretrain(const HistoryDataset& dataset, const ForecastConfig& cfg);

/// Deterministic forward pass on one window (channels x H).
Forecast forecast(const nn::Network& net, const Tensor& window, const ForecastConfig& cfg);

/// Repeats the last observed row k times.
Forecast persistence_baseline(const Tensor& window, std::size_t k);

/// Eq.-style extended state: [raw | forecast], raw occupying the prefix
/// unmodified.
std::vector<double> extend_state(const env::RawState& raw, const Forecast& f);

/// Mean squared error of `net` over the validation rows (averaged per
/// element); pairs with persistence_mse for the comparison gate.
double validation_mse(const nn::Network& net, const HistoryDataset& dataset);
double persistence_validation_mse(const HistoryDataset& dataset, std::size_t k);

void save_loss_curve(const std::vector<EpochLoss>& curve, const std::filesystem::path& path);

// Checkpoints: network + the config it was trained with; load rejects a
// config whose architecture does not match.
void save_forecaster(const nn::Network& net, const ForecastConfig& cfg,
                     const std::filesystem::path& path);
nn::Network load_forecaster(const std::filesystem::path& path, const ForecastConfig& cfg);

} // namespace peco::forecaster
