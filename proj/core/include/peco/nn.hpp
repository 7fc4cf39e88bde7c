#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "peco/rng.hpp"
#include "peco/tensor.hpp"

namespace peco::nn {

enum class LayerKind { dense, conv1d, lstm, activation };
enum class Activation { relu, tanh, sigmoid, identity };

const char* to_string(LayerKind k);
const char* to_string(Activation a);
LayerKind layer_kind_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

/// One layer of the network. `dims` semantics per kind:
///   dense:      in -> out, optional bias
///   conv1d:     in_channels -> out_channels, kernel width, valid padding, stride 1;
///               input (B, C_in, T) -> output (B, C_out, T-K+1)
///   lstm:       per-step input size `in`, hidden units `hidden`;
///               input (B, C, T) -> output (B, hidden) (last hidden state)
///   activation: elementwise, any shape
struct LayerSpec {
    LayerKind kind = LayerKind::activation;
    std::size_t in = 0;
    std::size_t out = 0;
    bool bias = true;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t hidden = 0;
    Activation act = Activation::identity;

    static LayerSpec Dense(std::size_t in, std::size_t out, bool bias = true);
    static LayerSpec Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
    static LayerSpec Lstm(std::size_t in, std::size_t hidden);
    static LayerSpec Act(Activation fn);

    std::size_t param_count() const;
    void validate() const;
    bool operator==(const LayerSpec&) const = default;
};

/// Per-layer intermediates captured by forward() for use in backward().
struct LayerCache {
    Tensor input;
    Tensor output;
    // lstm only: gate activations and cell states per timestep
    std::vector<double> gates;  // (T, B, 4H) flattened, order [i f g o]
    std::vector<double> cells;  // (T, B, H)
    std::vector<double> hiddens; // (T, B, H)
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    std::uint64_t revision = 0; // parameter revision the cache was built from
};

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// A sequential stack of layers over one flat parameter vector with
/// per-layer views, plus Adam moment state. Forward/backward are const and
/// re-entrant; parameter updates are single-writer.
class Network {
public:
    Network() = default;
    explicit Network(std::vector<LayerSpec> layers);

    /// Glorot-uniform init for dense/conv; scaled uniform for LSTM with
    /// forget-gate bias 1.
    void init_params(std::uint64_t seed);

    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::size_t param_count() const { return params_.size(); }
    std::span<const double> params() const { return params_; }
    std::span<double> params_mutable();
    std::span<const double> layer_params(std::size_t layer) const;
    std::uint64_t revision() const { return revision_; }

    /// Deterministic forward pass. Validates the input shape against the
    /// first layer and every intermediate shape along the way.
    Tensor forward(const Tensor& input, ForwardCache* cache = nullptr) const;

    /// Gradient of a scalar loss w.r.t. all parameters, given dLoss/dOutput.
    /// `cache` must come from a forward() on the current parameters.
    std::vector<double> backward(const ForwardCache& cache, const Tensor& output_grad) const;

    /// One Adam update in place. grad.size() must equal param_count().
    void adam_step(std::span<const double> grad, const AdamParams& p = {});

    /// Reset Adam moments (fresh optimizer).
    void reset_optimizer();

    /// θ_this ← τ·θ_src + (1−τ)·θ_this, elementwise. Architectures must match.
    void blend_from(const Network& src, double tau);

    bool same_architecture(const Network& other) const { return layers_ == other.layers_; }

private:
    std::vector<LayerSpec> layers_;
    std::vector<std::size_t> offsets_; // per-layer start into params_
    std::vector<double> params_;
    std::vector<double> adam_m_;
    std::vector<double> adam_v_;
    std::uint64_t adam_t_ = 0;
    std::uint64_t revision_ = 0;

    void bump_revision();
};

/// Checkpoint I/O: self-describing JSON header (layer specs) + flat
/// parameter array. Doubles round-trip exactly. Optimizer state is not
/// persisted.
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

// JSON-object (de)serialization helpers shared by the agent/forecaster
// checkpoint formats. The string carries a complete JSON object.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& json_text);

} // namespace peco::nn
