#include "peco/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "peco/errors.hpp"

namespace peco::nn {

using json = nlohmann::json;

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::lstm: return "lstm";
        case LayerKind::activation: return "activation";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "dense") return LayerKind::dense;
    if (s == "conv1d") return LayerKind::conv1d;
    if (s == "lstm") return LayerKind::lstm;
    if (s == "activation") return LayerKind::activation;
    throw IoError("unknown layer kind '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw IoError("unknown activation '" + s + "'");
}

LayerSpec LayerSpec::Dense(std::size_t in, std::size_t out, bool bias) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.in = in;
    s.out = out;
    s.bias = bias;
    return s;
}

LayerSpec LayerSpec::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
    LayerSpec s;
    s.kind = LayerKind::conv1d;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel = kernel;
    return s;
}

LayerSpec LayerSpec::Lstm(std::size_t in, std::size_t hidden) {
    LayerSpec s;
    s.kind = LayerKind::lstm;
    s.in = in;
    s.hidden = hidden;
    return s;
}

LayerSpec LayerSpec::Act(Activation fn) {
    LayerSpec s;
    s.kind = LayerKind::activation;
    s.act = fn;
    return s;
}

std::size_t LayerSpec::param_count() const {
    switch (kind) {
        case LayerKind::dense: return in * out + (bias ? out : 0);
        case LayerKind::conv1d: return out_channels * in_channels * kernel + out_channels;
        case LayerKind::lstm: return 4 * hidden * in + 4 * hidden * hidden + 4 * hidden;
        case LayerKind::activation: return 0;
    }
    return 0;
}

void LayerSpec::validate() const {
    switch (kind) {
        case LayerKind::dense:
            if (in == 0 || out == 0) throw InvalidArgument("dense layer: dims must be positive");
            break;
        case LayerKind::conv1d:
            if (in_channels == 0 || out_channels == 0 || kernel == 0)
                throw InvalidArgument("conv1d layer: dims must be positive");
            break;
        case LayerKind::lstm:
            if (in == 0 || hidden == 0) throw InvalidArgument("lstm layer: dims must be positive");
            break;
        case LayerKind::activation:
            break;
    }
}

namespace {

// Symbolic shape used to validate layer chaining at construction time.
// vector(n): rank-2 (B, n); sequence(c): rank-3 (B, c, T) with T unknown.
struct FlowShape {
    enum { unknown, vector, sequence } kind = unknown;
    std::size_t features = 0;
};

FlowShape apply_spec(const FlowShape& cur, const LayerSpec& spec, std::size_t index) {
    auto err = [&](const std::string& msg) {
        throw ShapeError("layer " + std::to_string(index) + " (" + to_string(spec.kind) + "): " + msg);
    };
    switch (spec.kind) {
        case LayerKind::dense:
            if (cur.kind == FlowShape::sequence) err("dense cannot consume a sequence");
            if (cur.kind == FlowShape::vector && cur.features != spec.in)
                err("expects " + std::to_string(spec.in) + " features, got " + std::to_string(cur.features));
            return {FlowShape::vector, spec.out};
        case LayerKind::conv1d:
            if (cur.kind == FlowShape::vector) err("conv1d cannot consume a flat vector");
            if (cur.kind == FlowShape::sequence && cur.features != spec.in_channels)
                err("expects " + std::to_string(spec.in_channels) + " channels, got " +
                    std::to_string(cur.features));
            return {FlowShape::sequence, spec.out_channels};
        case LayerKind::lstm:
            if (cur.kind == FlowShape::vector) err("lstm cannot consume a flat vector");
            if (cur.kind == FlowShape::sequence && cur.features != spec.in)
                err("expects " + std::to_string(spec.in) + " channels, got " + std::to_string(cur.features));
            return {FlowShape::vector, spec.hidden};
        case LayerKind::activation:
            return cur;
    }
    return cur;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

Network::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw InvalidArgument("Network: no layers");
    FlowShape flow;
    std::size_t total = 0;
    offsets_.reserve(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].validate();
        flow = apply_spec(flow, layers_[i], i);
        offsets_.push_back(total);
        total += layers_[i].param_count();
    }
    params_.assign(total, 0.0);
    adam_m_.assign(total, 0.0);
    adam_v_.assign(total, 0.0);
}

void Network::bump_revision() { ++revision_; }

std::span<double> Network::params_mutable() {
    bump_revision();
    return params_;
}

std::span<const double> Network::layer_params(std::size_t layer) const {
    if (layer >= layers_.size()) throw InvalidArgument("layer index out of range");
    return std::span<const double>(params_).subspan(offsets_[layer], layers_[layer].param_count());
}

void Network::init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const LayerSpec& s = layers_[li];
        double* p = params_.data() + offsets_[li];
        switch (s.kind) {
            case LayerKind::dense: {
                const double bound = std::sqrt(6.0 / double(s.in + s.out));
                for (std::size_t i = 0; i < s.in * s.out; ++i) p[i] = rng.uniform(-bound, bound);
                if (s.bias)
                    for (std::size_t i = 0; i < s.out; ++i) p[s.in * s.out + i] = 0.0;
                break;
            }
            case LayerKind::conv1d: {
                const std::size_t w = s.out_channels * s.in_channels * s.kernel;
                const double bound =
                    std::sqrt(6.0 / double(s.in_channels * s.kernel + s.out_channels * s.kernel));
                for (std::size_t i = 0; i < w; ++i) p[i] = rng.uniform(-bound, bound);
                for (std::size_t i = 0; i < s.out_channels; ++i) p[w + i] = 0.0;
                break;
            }
            case LayerKind::lstm: {
                const std::size_t h = s.hidden;
                const double bound = 1.0 / std::sqrt(double(h));
                const std::size_t wx = 4 * h * s.in;
                const std::size_t wh = 4 * h * h;
                for (std::size_t i = 0; i < wx + wh; ++i) p[i] = rng.uniform(-bound, bound);
                // bias zero except forget gate block, which starts at 1
                for (std::size_t i = 0; i < 4 * h; ++i) p[wx + wh + i] = 0.0;
                for (std::size_t i = h; i < 2 * h; ++i) p[wx + wh + i] = 1.0;
                break;
            }
            case LayerKind::activation:
                break;
        }
    }
    adam_m_.assign(params_.size(), 0.0);
    adam_v_.assign(params_.size(), 0.0);
    adam_t_ = 0;
    bump_revision();
}

Tensor Network::forward(const Tensor& input, ForwardCache* cache) const {
    if (cache) {
        cache->layers.clear();
        cache->layers.reserve(layers_.size());
        cache->revision = revision_;
    }
    Tensor cur = input;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const LayerSpec& s = layers_[li];
        const double* p = params_.data() + offsets_[li];
        Tensor out;
        LayerCache lc;
        switch (s.kind) {
            case LayerKind::dense: {
                if (cur.rank() != 2 || cur.dim(1) != s.in)
                    throw ShapeError("dense layer " + std::to_string(li) + ": expected (B," +
                                     std::to_string(s.in) + "), got " + shape_string(cur.shape));
                const std::size_t B = cur.dim(0);
                out = Tensor::zeros({B, s.out});
                const double* W = p;
                const double* bias = s.bias ? p + s.in * s.out : nullptr;
                for (std::size_t b = 0; b < B; ++b) {
                    const double* x = cur.data.data() + b * s.in;
                    double* y = out.data.data() + b * s.out;
                    if (bias) std::memcpy(y, bias, s.out * sizeof(double));
                    for (std::size_t i = 0; i < s.in; ++i) {
                        const double xi = x[i];
                        if (xi == 0.0) continue;
                        const double* wrow = W + i * s.out;
                        for (std::size_t o = 0; o < s.out; ++o) y[o] += xi * wrow[o];
                    }
                }
                break;
            }
            case LayerKind::conv1d: {
                if (cur.rank() != 3 || cur.dim(1) != s.in_channels)
                    throw ShapeError("conv1d layer " + std::to_string(li) + ": expected (B," +
                                     std::to_string(s.in_channels) + ",T), got " +
                                     shape_string(cur.shape));
                const std::size_t B = cur.dim(0), C = s.in_channels, T = cur.dim(2);
                if (T < s.kernel)
                    throw ShapeError("conv1d layer " + std::to_string(li) +
                                     ": input length " + std::to_string(T) +
                                     " shorter than kernel " + std::to_string(s.kernel));
                const std::size_t To = T - s.kernel + 1;
                out = Tensor::zeros({B, s.out_channels, To});
                const double* W = p;
                const double* bias = p + s.out_channels * C * s.kernel;
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t co = 0; co < s.out_channels; ++co) {
                        double* y = out.data.data() + (b * s.out_channels + co) * To;
                        for (std::size_t t = 0; t < To; ++t) y[t] = bias[co];
                        for (std::size_t ci = 0; ci < C; ++ci) {
                            const double* x = cur.data.data() + (b * C + ci) * T;
                            const double* w = W + (co * C + ci) * s.kernel;
                            for (std::size_t k = 0; k < s.kernel; ++k) {
                                const double wk = w[k];
                                for (std::size_t t = 0; t < To; ++t) y[t] += wk * x[t + k];
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::lstm: {
                if (cur.rank() != 3 || cur.dim(1) != s.in)
                    throw ShapeError("lstm layer " + std::to_string(li) + ": expected (B," +
                                     std::to_string(s.in) + ",T), got " + shape_string(cur.shape));
                const std::size_t B = cur.dim(0), C = s.in, T = cur.dim(2), H = s.hidden;
                const double* Wx = p;
                const double* Wh = p + 4 * H * C;
                const double* bias = p + 4 * H * C + 4 * H * H;
                out = Tensor::zeros({B, H});
                if (cache) {
                    lc.gates.assign(T * B * 4 * H, 0.0);
                    lc.cells.assign(T * B * H, 0.0);
                    lc.hiddens.assign(T * B * H, 0.0);
                }
                std::vector<double> h_prev(B * H, 0.0), c_prev(B * H, 0.0);
                std::vector<double> gates(4 * H), xbuf(C);
                for (std::size_t t = 0; t < T; ++t) {
                    for (std::size_t b = 0; b < B; ++b) {
                        for (std::size_t c = 0; c < C; ++c) xbuf[c] = cur.at(b, c, t);
                        const double* hp = h_prev.data() + b * H;
                        for (std::size_t j = 0; j < 4 * H; ++j) {
                            double acc = bias[j];
                            const double* wxr = Wx + j * C;
                            for (std::size_t c = 0; c < C; ++c) acc += wxr[c] * xbuf[c];
                            const double* whr = Wh + j * H;
                            for (std::size_t h = 0; h < H; ++h) acc += whr[h] * hp[h];
                            gates[j] = acc;
                        }
                        double* cp = c_prev.data() + b * H;
                        double* hpw = h_prev.data() + b * H;
                        for (std::size_t h = 0; h < H; ++h) {
                            const double ig = sigmoid(gates[h]);
                            const double fg = sigmoid(gates[H + h]);
                            const double gg = std::tanh(gates[2 * H + h]);
                            const double og = sigmoid(gates[3 * H + h]);
                            const double cnew = fg * cp[h] + ig * gg;
                            const double hnew = og * std::tanh(cnew);
                            if (cache) {
                                double* g = lc.gates.data() + ((t * B + b) * 4 * H);
                                g[h] = ig;
                                g[H + h] = fg;
                                g[2 * H + h] = gg;
                                g[3 * H + h] = og;
                                lc.cells[(t * B + b) * H + h] = cnew;
                                lc.hiddens[(t * B + b) * H + h] = hnew;
                            }
                            cp[h] = cnew;
                            hpw[h] = hnew;
                        }
                    }
                }
                std::memcpy(out.data.data(), h_prev.data(), B * H * sizeof(double));
                break;
            }
            case LayerKind::activation: {
                out = cur;
                switch (s.act) {
                    case Activation::relu:
                        for (double& v : out.data) v = v > 0.0 ? v : 0.0;
                        break;
                    case Activation::tanh:
                        for (double& v : out.data) v = std::tanh(v);
                        break;
                    case Activation::sigmoid:
                        for (double& v : out.data) v = sigmoid(v);
                        break;
                    case Activation::identity:
                        break;
                }
                break;
            }
        }
        if (cache) {
            lc.input = std::move(cur);
            lc.output = out;
            cache->layers.push_back(std::move(lc));
        }
        cur = std::move(out);
    }
    if (!cur.all_finite()) throw NumericError("forward: non-finite output");
    return cur;
}

std::vector<double> Network::backward(const ForwardCache& cache, const Tensor& output_grad) const {
    if (cache.layers.size() != layers_.size())
        throw StateError("backward: cache does not match this network");
    if (cache.revision != revision_)
        throw StateError("backward: cache is stale (parameters changed since forward)");
    if (output_grad.shape != cache.layers.back().output.shape)
        throw ShapeError("backward: output_grad shape " + shape_string(output_grad.shape) +
                         " does not match forward output " +
                         shape_string(cache.layers.back().output.shape));

    std::vector<double> grad(params_.size(), 0.0);
    Tensor dy = output_grad;

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const LayerSpec& s = layers_[li];
        const LayerCache& lc = cache.layers[li];
        const double* p = params_.data() + offsets_[li];
        double* g = grad.data() + offsets_[li];
        Tensor dx;
        switch (s.kind) {
            case LayerKind::dense: {
                const std::size_t B = lc.input.dim(0);
                dx = Tensor::zeros(lc.input.shape);
                const double* W = p;
                double* gW = g;
                double* gb = s.bias ? g + s.in * s.out : nullptr;
                for (std::size_t b = 0; b < B; ++b) {
                    const double* x = lc.input.data.data() + b * s.in;
                    const double* d = dy.data.data() + b * s.out;
                    double* dxr = dx.data.data() + b * s.in;
                    if (gb)
                        for (std::size_t o = 0; o < s.out; ++o) gb[o] += d[o];
                    for (std::size_t i = 0; i < s.in; ++i) {
                        const double* wrow = W + i * s.out;
                        double* gwrow = gW + i * s.out;
                        const double xi = x[i];
                        double acc = 0.0;
                        for (std::size_t o = 0; o < s.out; ++o) {
                            acc += d[o] * wrow[o];
                            gwrow[o] += xi * d[o];
                        }
                        dxr[i] = acc;
                    }
                }
                break;
            }
            case LayerKind::conv1d: {
                const std::size_t B = lc.input.dim(0), C = s.in_channels, T = lc.input.dim(2);
                const std::size_t To = T - s.kernel + 1;
                dx = Tensor::zeros(lc.input.shape);
                const double* W = p;
                double* gW = g;
                double* gb = g + s.out_channels * C * s.kernel;
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t co = 0; co < s.out_channels; ++co) {
                        const double* d = dy.data.data() + (b * s.out_channels + co) * To;
                        for (std::size_t t = 0; t < To; ++t) gb[co] += d[t];
                        for (std::size_t ci = 0; ci < C; ++ci) {
                            const double* x = lc.input.data.data() + (b * C + ci) * T;
                            double* dxr = dx.data.data() + (b * C + ci) * T;
                            const double* w = W + (co * C + ci) * s.kernel;
                            double* gw = gW + (co * C + ci) * s.kernel;
                            for (std::size_t k = 0; k < s.kernel; ++k) {
                                const double wk = w[k];
                                double acc = 0.0;
                                for (std::size_t t = 0; t < To; ++t) {
                                    acc += d[t] * x[t + k];
                                    dxr[t + k] += wk * d[t];
                                }
                                gw[k] += acc;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::lstm: {
                const std::size_t B = lc.input.dim(0), C = s.in, T = lc.input.dim(2), H = s.hidden;
                dx = Tensor::zeros(lc.input.shape);
                const double* Wx = p;
                const double* Wh = p + 4 * H * C;
                double* gWx = g;
                double* gWh = g + 4 * H * C;
                double* gb = g + 4 * H * C + 4 * H * H;
                std::vector<double> dh(B * H, 0.0), dc(B * H, 0.0), dh_next(B * H, 0.0);
                // only the last hidden state feeds the next layer
                std::memcpy(dh.data(), dy.data.data(), B * H * sizeof(double));
                std::vector<double> dz(4 * H), xbuf(C);
                for (std::size_t t = T; t-- > 0;) {
                    std::fill(dh_next.begin(), dh_next.end(), 0.0);
                    for (std::size_t b = 0; b < B; ++b) {
                        const double* gate = lc.gates.data() + (t * B + b) * 4 * H;
                        const double* cell = lc.cells.data() + (t * B + b) * H;
                        const double* cprev =
                            t > 0 ? lc.cells.data() + ((t - 1) * B + b) * H : nullptr;
                        const double* hprev =
                            t > 0 ? lc.hiddens.data() + ((t - 1) * B + b) * H : nullptr;
                        double* dhb = dh.data() + b * H;
                        double* dcb = dc.data() + b * H;
                        for (std::size_t h = 0; h < H; ++h) {
                            const double ig = gate[h], fg = gate[H + h], gg = gate[2 * H + h],
                                         og = gate[3 * H + h];
                            const double tc = std::tanh(cell[h]);
                            const double dout = dhb[h];
                            const double dcell = dcb[h] + dout * og * (1.0 - tc * tc);
                            const double di = dcell * gg;
                            const double df = dcell * (cprev ? cprev[h] : 0.0);
                            const double dg = dcell * ig;
                            const double do_ = dout * tc;
                            dz[h] = di * ig * (1.0 - ig);
                            dz[H + h] = df * fg * (1.0 - fg);
                            dz[2 * H + h] = dg * (1.0 - gg * gg);
                            dz[3 * H + h] = do_ * og * (1.0 - og);
                            dcb[h] = dcell * fg; // becomes dc for t-1
                        }
                        for (std::size_t c = 0; c < C; ++c) xbuf[c] = lc.input.at(b, c, t);
                        double* dhn = dh_next.data() + b * H;
                        for (std::size_t j = 0; j < 4 * H; ++j) {
                            const double dzj = dz[j];
                            if (dzj == 0.0) continue;
                            gb[j] += dzj;
                            double* gwx = gWx + j * C;
                            for (std::size_t c = 0; c < C; ++c) gwx[c] += dzj * xbuf[c];
                            if (hprev) {
                                double* gwh = gWh + j * H;
                                for (std::size_t h = 0; h < H; ++h) gwh[h] += dzj * hprev[h];
                            }
                            const double* wxr = Wx + j * C;
                            for (std::size_t c = 0; c < C; ++c) dx.at(b, c, t) += wxr[c] * dzj;
                            const double* whr = Wh + j * H;
                            for (std::size_t h = 0; h < H; ++h) dhn[h] += whr[h] * dzj;
                        }
                    }
                    std::swap(dh, dh_next);
                }
                break;
            }
            case LayerKind::activation: {
                dx = dy;
                switch (s.act) {
                    case Activation::relu:
                        for (std::size_t i = 0; i < dx.size(); ++i)
                            if (lc.input.data[i] <= 0.0) dx.data[i] = 0.0;
                        break;
                    case Activation::tanh:
                        for (std::size_t i = 0; i < dx.size(); ++i) {
                            const double y = lc.output.data[i];
                            dx.data[i] *= (1.0 - y * y);
                        }
                        break;
                    case Activation::sigmoid:
                        for (std::size_t i = 0; i < dx.size(); ++i) {
                            const double y = lc.output.data[i];
                            dx.data[i] *= y * (1.0 - y);
                        }
                        break;
                    case Activation::identity:
                        break;
                }
                break;
            }
        }
        dy = std::move(dx);
    }
    return grad;
}

void Network::adam_step(std::span<const double> grad, const AdamParams& p) {
    if (grad.size() != params_.size())
        throw ShapeError("adam_step: gradient length " + std::to_string(grad.size()) +
                         " != parameter count " + std::to_string(params_.size()));
    for (double gv : grad)
        if (!std::isfinite(gv)) throw NumericError("adam_step: non-finite gradient");
    ++adam_t_;
    const double c1 = 1.0 - std::pow(p.beta1, double(adam_t_));
    const double c2 = 1.0 - std::pow(p.beta2, double(adam_t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const double gv = grad[i];
        adam_m_[i] = p.beta1 * adam_m_[i] + (1.0 - p.beta1) * gv;
        adam_v_[i] = p.beta2 * adam_v_[i] + (1.0 - p.beta2) * gv * gv;
        const double mhat = adam_m_[i] / c1;
        const double vhat = adam_v_[i] / c2;
        params_[i] -= p.lr * mhat / (std::sqrt(vhat) + p.eps);
    }
    bump_revision();
}

void Network::reset_optimizer() {
    std::fill(adam_m_.begin(), adam_m_.end(), 0.0);
    std::fill(adam_v_.begin(), adam_v_.end(), 0.0);
    adam_t_ = 0;
}

void Network::blend_from(const Network& src, double tau) {
    if (!same_architecture(src)) throw ShapeError("blend_from: architecture mismatch");
    if (tau < 0.0 || tau > 1.0) throw InvalidArgument("blend_from: tau must be in [0,1]");
    for (std::size_t i = 0; i < params_.size(); ++i)
        params_[i] = tau * src.params_[i] + (1.0 - tau) * params_[i];
    bump_revision();
}

namespace {

json spec_to_json(const LayerSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    switch (s.kind) {
        case LayerKind::dense:
            j["in"] = s.in;
            j["out"] = s.out;
            j["bias"] = s.bias;
            break;
        case LayerKind::conv1d:
            j["in_channels"] = s.in_channels;
            j["out_channels"] = s.out_channels;
            j["kernel"] = s.kernel;
            break;
        case LayerKind::lstm:
            j["in"] = s.in;
            j["hidden"] = s.hidden;
            break;
        case LayerKind::activation:
            j["fn"] = to_string(s.act);
            break;
    }
    return j;
}

LayerSpec spec_from_json(const json& j) {
    const LayerKind kind = layer_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
        case LayerKind::dense:
            return LayerSpec::Dense(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                                    j.value("bias", true));
        case LayerKind::conv1d:
            return LayerSpec::Conv1d(j.at("in_channels").get<std::size_t>(),
                                     j.at("out_channels").get<std::size_t>(),
                                     j.at("kernel").get<std::size_t>());
        case LayerKind::lstm:
            return LayerSpec::Lstm(j.at("in").get<std::size_t>(), j.at("hidden").get<std::size_t>());
        case LayerKind::activation:
            return LayerSpec::Act(activation_from_string(j.at("fn").get<std::string>()));
    }
    throw IoError("bad layer spec");
}

json network_to_json_obj(const Network& net) {
    json j;
    j["format"] = "peco-network";
    j["version"] = 1;
    json layers = json::array();
    for (const auto& s : net.layers()) layers.push_back(spec_to_json(s));
    j["layers"] = std::move(layers);
    j["params"] = std::vector<double>(net.params().begin(), net.params().end());
    return j;
}

Network network_from_json_obj(const json& j) {
    if (j.value("format", "") != "peco-network")
        throw IoError("not a peco-network checkpoint");
    if (j.value("version", 0) != 1) throw IoError("unsupported network checkpoint version");
    std::vector<LayerSpec> specs;
    for (const auto& lj : j.at("layers")) specs.push_back(spec_from_json(lj));
    Network net(std::move(specs));
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count())
        throw IoError("checkpoint parameter count " + std::to_string(params.size()) +
                      " does not match architecture (" + std::to_string(net.param_count()) + ")");
    auto dst = net.params_mutable();
    std::copy(params.begin(), params.end(), dst.begin());
    return net;
}

} // namespace

std::string network_to_json(const Network& net) { return network_to_json_obj(net).dump(); }

Network network_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("network checkpoint parse error: ") + e.what());
    }
    try {
        return network_from_json_obj(j);
    } catch (const json::exception& e) {
        throw IoError(std::string("network checkpoint structure error: ") + e.what());
    }
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << network_to_json_obj(net).dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_json(text);
}

} // namespace peco::nn
