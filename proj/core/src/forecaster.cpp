#include "peco/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "peco/errors.hpp"
#include "peco/format.hpp"
#include "peco/rng.hpp"

namespace peco::forecaster {

using json = nlohmann::json;

void ForecastConfig::validate() const {
    if (history_window == 0 || horizon == 0 || input_channels == 0 || conv_channels == 0 ||
        kernel_width == 0 || lstm_hidden == 0 || batch_size == 0)
        throw InvalidArgument("ForecastConfig: all sizes must be positive");
    if (history_window < kernel_width)
        throw InvalidArgument("ForecastConfig: history_window must be >= kernel_width");
    if (!(lr > 0.0)) throw InvalidArgument("ForecastConfig: lr must be positive");
}

nn::Network build_network(const ForecastConfig& cfg) {
    cfg.validate();
    nn::Network net({
        nn::LayerSpec::Conv1d(cfg.input_channels, cfg.conv_channels, cfg.kernel_width),
        nn::LayerSpec::Act(nn::Activation::relu),
        nn::LayerSpec::Lstm(cfg.conv_channels, cfg.lstm_hidden),
        nn::LayerSpec::Dense(cfg.lstm_hidden, cfg.horizon * cfg.input_channels),
    });
    net.init_params(cfg.seed);
    return net;
}

HistoryDataset build_dataset(const workload::WorkloadTrace& trace, const ForecastConfig& cfg) {
    cfg.validate();
    trace.validate();
    const std::size_t channels = trace.n_locations() + 1;
    if (channels != cfg.input_channels)
        throw InvalidArgument("build_dataset: trace has " + std::to_string(channels) +
                              " channels, config expects " + std::to_string(cfg.input_channels));
    const std::size_t H = cfg.history_window, k = cfg.horizon;
    if (trace.horizon < H + k)
        throw InsufficientData("build_dataset: trace horizon " + std::to_string(trace.horizon) +
                               " < history_window + horizon = " + std::to_string(H + k));
    const std::size_t n = trace.horizon - H - k + 1;

    auto channel_value = [&](std::size_t c, std::size_t t) {
        return c < trace.n_locations() ? trace.cpu_series[c][t] : trace.net_series[t];
    };

    HistoryDataset ds;
    ds.windows = Tensor::zeros({n, channels, H});
    ds.targets = Tensor::zeros({n, k * channels});
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t h = 0; h < H; ++h) ds.windows.at(s, c, h) = channel_value(c, s + h);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t c = 0; c < channels; ++c)
                ds.targets.at(s, i * channels + c) = channel_value(c, s + H + i);
    }
    ds.train_count = std::max<std::size_t>(1, (n * 8) / 10);
    if (ds.train_count > n) ds.train_count = n;
    return ds;
}

namespace {

Tensor gather_windows(const HistoryDataset& ds, const std::vector<std::size_t>& idx) {
    const std::size_t C = ds.windows.dim(1), H = ds.windows.dim(2);
    Tensor out = Tensor::zeros({idx.size(), C, H});
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy_n(ds.windows.data.begin() + idx[r] * C * H, C * H,
                    out.data.begin() + r * C * H);
    return out;
}

Tensor gather_targets(const HistoryDataset& ds, const std::vector<std::size_t>& idx) {
    const std::size_t D = ds.targets.dim(1);
    Tensor out = Tensor::zeros({idx.size(), D});
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy_n(ds.targets.data.begin() + idx[r] * D, D, out.data.begin() + r * D);
    return out;
}

double mse_over(const nn::Network& net, const HistoryDataset& ds, std::size_t begin,
                std::size_t end) {
    const std::vector<std::size_t> idx = [&] {
        std::vector<std::size_t> v(end - begin);
        std::iota(v.begin(), v.end(), begin);
        return v;
    }();
    const Tensor x = gather_windows(ds, idx);
    const Tensor y = gather_targets(ds, idx);
    const Tensor pred = net.forward(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - y.data[i];
        sum += d * d;
    }
    return sum / double(pred.size());
}

} // namespace

PretrainResult pretrain(const HistoryDataset& dataset, const ForecastConfig& cfg) {
    cfg.validate();
    if (dataset.size() == 0) throw InsufficientData("pretrain: empty dataset");

    PretrainResult result{build_network(cfg), {}, 0.0, 0.0};
    nn::Network& net = result.net;

    const std::size_t n_train = dataset.train_count;
    const std::size_t n_val = dataset.validation_count();
    // with no validation rows the train split doubles as the monitor set
    const std::size_t val_begin = n_val > 0 ? n_train : 0;
    const std::size_t val_end = n_val > 0 ? dataset.size() : n_train;

    std::vector<double> best_params(net.params().begin(), net.params().end());
    double best_val = mse_over(net, dataset, val_begin, val_end);

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    const nn::AdamParams adam{cfg.lr, 0.9, 0.999, 1e-8};

    for (std::size_t epoch = 0; epoch < cfg.train_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, 0x5u + epoch));
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.integer(i)]);

        double loss_sum = 0.0;
        std::size_t loss_rows = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n_train);
            const std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            const Tensor x = gather_windows(dataset, idx);
            const Tensor y = gather_targets(dataset, idx);
            nn::ForwardCache cache;
            const Tensor pred = net.forward(x, &cache);
            Tensor grad = Tensor::zeros(pred.shape);
            double loss = 0.0;
            const double scale = 2.0 / double(pred.size());
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const double d = pred.data[i] - y.data[i];
                loss += d * d;
                grad.data[i] = scale * d;
            }
            loss /= double(pred.size());
            if (!std::isfinite(loss))
                throw NumericError("pretrain: loss diverged at epoch " + std::to_string(epoch));
            loss_sum += loss * double(idx.size());
            loss_rows += idx.size();
            net.adam_step(net.backward(cache, grad), adam);
        }

        EpochLoss row;
        row.epoch = epoch;
        row.train_mse = loss_sum / double(loss_rows);
        row.val_mse = mse_over(net, dataset, val_begin, val_end);
        result.curve.push_back(row);
        if (row.val_mse < best_val) {
            best_val = row.val_mse;
            best_params.assign(net.params().begin(), net.params().end());
        }
    }

    auto dst = net.params_mutable();
    std::copy(best_params.begin(), best_params.end(), dst.begin());
    result.final_val_mse = best_val;
    result.persistence_val_mse = persistence_validation_mse(dataset, cfg.horizon);
    return result;
}

Forecast forecast(const nn::Network& net, const Tensor& window, const ForecastConfig& cfg) {
    window.require_shape({cfg.input_channels, cfg.history_window}, "forecast window");
    Tensor x = Tensor::zeros({1, cfg.input_channels, cfg.history_window});
    x.data = window.data;
    const Tensor pred = net.forward(x);
    Forecast f;
    f.horizon = cfg.horizon;
    f.channels = cfg.input_channels;
    f.values = pred.data;
    return f;
}

Forecast persistence_baseline(const Tensor& window, std::size_t k) {
    if (window.rank() != 2 || window.dim(0) == 0 || window.dim(1) == 0)
        throw ShapeError("persistence_baseline: window must be (channels x len), non-empty");
    if (k == 0) throw InvalidArgument("persistence_baseline: k must be >= 1");
    const std::size_t C = window.dim(0), H = window.dim(1);
    Forecast f;
    f.horizon = k;
    f.channels = C;
    f.values.resize(k * C);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < C; ++c) f.values[i * C + c] = window.at(c, H - 1);
    return f;
}

std::vector<double> extend_state(const env::RawState& raw, const Forecast& f) {
    if (f.values.size() != f.horizon * f.channels)
        throw ShapeError("extend_state: forecast value count does not match its shape");
    std::vector<double> out;
    out.reserve(raw.values.size() + f.values.size());
    out.insert(out.end(), raw.values.begin(), raw.values.end());
    out.insert(out.end(), f.values.begin(), f.values.end());
    return out;
}

double validation_mse(const nn::Network& net, const HistoryDataset& dataset) {
    const std::size_t n_val = dataset.validation_count();
    const std::size_t begin = n_val > 0 ? dataset.train_count : 0;
    const std::size_t end = n_val > 0 ? dataset.size() : dataset.train_count;
    return mse_over(net, dataset, begin, end);
}

double persistence_validation_mse(const HistoryDataset& dataset, std::size_t k) {
    const std::size_t n_val = dataset.validation_count();
    const std::size_t begin = n_val > 0 ? dataset.train_count : 0;
    const std::size_t end = n_val > 0 ? dataset.size() : dataset.train_count;
    const std::size_t C = dataset.windows.dim(1), H = dataset.windows.dim(2);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = begin; s < end; ++s) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t c = 0; c < C; ++c) {
                const double pred = dataset.windows.at(s, c, H - 1);
                const double d = pred - dataset.targets.at(s, i * C + c);
                sum += d * d;
                ++count;
            }
        }
    }
    return sum / double(count);
}

void save_loss_curve(const std::vector<EpochLoss>& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "epoch,train_mse,val_mse\n";
    for (const auto& row : curve)
        out << row.epoch << "," << fmt_double(row.train_mse) << "," << fmt_double(row.val_mse)
            << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

void save_forecaster(const nn::Network& net, const ForecastConfig& cfg,
                     const std::filesystem::path& path) {
    json j;
    j["format"] = "peco-forecaster";
    j["version"] = 1;
    j["config"] = {
        {"history_window", cfg.history_window}, {"horizon", cfg.horizon},
        {"input_channels", cfg.input_channels}, {"conv_channels", cfg.conv_channels},
        {"kernel_width", cfg.kernel_width},     {"lstm_hidden", cfg.lstm_hidden},
    };
    j["network"] = json::parse(nn::network_to_json(net));
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

nn::Network load_forecaster(const std::filesystem::path& path, const ForecastConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("forecaster checkpoint parse error: " + std::string(e.what()));
    }
    if (j.value("format", "") != "peco-forecaster")
        throw IoError(path.string() + ": not a peco-forecaster checkpoint");
    nn::Network net = nn::network_from_json(j.at("network").dump());
    const nn::Network expected = [&] {
        nn::Network n = build_network(cfg);
        return n;
    }();
    if (!net.same_architecture(expected))
        throw IoError(path.string() + ": checkpoint architecture does not match the config");
    return net;
}

} // namespace peco::forecaster
