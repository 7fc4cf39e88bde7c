#include "peco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "peco/errors.hpp"
#include "peco/format.hpp"
#include "peco/rng.hpp"

namespace peco::trainer {

using json = nlohmann::json;

namespace {

// independent seed streams hanging off the user-visible seeds
constexpr std::uint64_t kPhase1Stream = 0xF17E;
constexpr std::uint64_t kActionStream = 0xAC71;
constexpr std::uint64_t kSampleStream = 0x5A3B;

constexpr std::size_t kAuditStride = 7;
constexpr std::size_t kAuditCap = 512;

} // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "total_reward", "avg_latency", "avg_energy",   "avg_cost",
        "throughput",   "utilization", "avg_makespan",
    };
    return names;
}

double metric_value(const MetricVector& m, std::size_t index) {
    switch (index) {
        case 0: return m.total_reward;
        case 1: return m.avg_latency;
        case 2: return m.avg_energy;
        case 3: return m.avg_cost;
        case 4: return m.throughput;
        case 5: return m.utilization;
        case 6: return m.avg_makespan;
    }
    throw InvalidArgument("metric_value: index out of range");
}

bool metric_higher_is_better(std::size_t index) {
    switch (index) {
        case 0: return true;  // total_reward
        case 4: return true;  // throughput
        case 5: return true;  // utilization
        default: return false;
    }
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::hybrid_better: return "hybrid";
        case Direction::baseline_better: return "baseline";
        case Direction::tie: return "tie";
    }
    return "?";
}

std::size_t baseline_alloc_level(std::size_t alloc_levels) {
    if (alloc_levels == 0) throw InvalidArgument("baseline_alloc_level: need levels >= 1");
    return (alloc_levels + 1) / 2 - 1; // fraction ceil(L/2)/L
}

namespace {

MetricVector episode_metrics(const env::EpisodeStats& st, std::size_t T) {
    MetricVector m;
    m.total_reward = st.total_reward;
    m.avg_latency = st.completed_tasks ? st.latency_sum / double(st.completed_tasks) : 0.0;
    m.avg_energy = st.steps ? st.energy_sum / double(st.steps) : 0.0;
    m.avg_cost = st.steps ? st.cost_sum / double(st.steps) : 0.0;
    m.throughput = double(st.completed_tasks) / double(T);
    m.utilization = st.steps ? st.utilization_sum / double(st.steps) : 0.0;
    m.avg_makespan = st.makespan_count ? st.makespan_sum / double(st.makespan_count) : 0.0;
    return m;
}

env::HybridAction to_env_action(std::size_t flat, config::Mode mode,
                                const env::ActionSpace& space, std::size_t mid_level) {
    if (mode == config::Mode::hybrid) return space.decode(flat);
    return env::HybridAction{flat, std::vector<std::size_t>(space.alloc_dims(), mid_level)};
}

struct Setup {
    workload::WorkloadTrace trace;
    forecaster::ForecastConfig fcfg;
    agent::AgentConfig acfg;
    std::size_t mid_level = 0;
};

Setup make_setup(const config::ExperimentConfig& cfg, config::Mode mode) {
    cfg.validate();
    Setup s;
    s.trace = workload::generate(cfg.trace, cfg.congestion, cfg.mobility);
    s.fcfg = cfg.forecast;
    s.mid_level = baseline_alloc_level(cfg.env.alloc_levels);

    const std::size_t raw_dim = cfg.env.state_dim();
    const std::size_t forecast_dim = cfg.forecast.horizon * cfg.forecast.input_channels;
    s.acfg = cfg.agent;
    if (mode == config::Mode::hybrid) {
        s.acfg.state_dim = raw_dim + forecast_dim;
        env::ActionSpace space(cfg.env.n_nodes(), cfg.env.alloc_dims, cfg.env.alloc_levels);
        s.acfg.n_actions = space.size();
    } else {
        s.acfg.state_dim = raw_dim;
        s.acfg.n_actions = cfg.env.n_nodes();
    }
    return s;
}

TrainedArtifacts run_training(const config::ExperimentConfig& cfg, config::Mode mode) {
    Setup setup = make_setup(cfg, mode);
    const std::size_t T = cfg.train.steps_per_episode;
    const std::size_t M = cfg.train.episodes;
    const bool hybrid = mode == config::Mode::hybrid;

    TrainingReport report;
    report.mode = mode;

    std::optional<nn::Network> fore;
    if (hybrid) {
        forecaster::PretrainResult pre = pretrain_forecaster(cfg);
        report.forecaster_curve = std::move(pre.curve);
        report.forecaster_val_mse = pre.final_val_mse;
        report.persistence_val_mse = pre.persistence_val_mse;
        fore = std::move(pre.net);
    }

    // Phase 2: DRL agent training
    env::EdgeCloudEnv sim(cfg.env);
    agent::DdqnAgent learner(setup.acfg);
    Rng action_rng(derive_seed(cfg.agent.seed, kActionStream));
    Rng sample_rng(derive_seed(cfg.agent.seed, kSampleStream));

    auto extended = [&](const env::RawState& raw) {
        const Tensor window = sim.series_window(setup.fcfg.history_window);
        const forecaster::Forecast f = forecaster::forecast(*fore, window, setup.fcfg);
        return std::pair(forecaster::extend_state(raw, f), window);
    };

    report.episodes.reserve(M);
    std::vector<agent::Transition> episode_log; // audit mode only

    for (std::size_t e = 0; e < M; ++e) {
        const std::uint64_t ep_seed = derive_seed(cfg.train.episode_seed, e);
        env::RawState raw = sim.reset(setup.trace, ep_seed);
        std::vector<double> state;
        if (hybrid) {
            state = extended(raw).first;
        } else {
            state = raw.values;
        }
        const double eps = agent::decay_epsilon(setup.acfg, double(e) * double(T));
        double loss_sum = 0.0;
        std::size_t learn_calls = 0;
        if (cfg.train.audit) episode_log.clear();

        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t flat = learner.select_action(state, eps, action_rng);
            const env::StepOutcome out =
                sim.step(to_env_action(flat, mode, sim.action_space(), setup.mid_level));

            std::vector<double> next_state;
            if (hybrid) {
                auto [ext, window] = extended(out.next_state);
                next_state = std::move(ext);
                if (cfg.train.audit && (e * T + t) % kAuditStride == 3 &&
                    report.audit.size() < kAuditCap) {
                    AuditRecord rec;
                    rec.episode = e;
                    rec.step = t;
                    rec.raw_state = out.next_state.values;
                    rec.window = window;
                    rec.extended_state = next_state;
                    report.audit.push_back(std::move(rec));
                }
            } else {
                next_state = out.next_state.values;
            }

            agent::Transition tr{state, flat, out.reward, next_state, out.done};
            if (cfg.train.audit) episode_log.push_back(tr);
            learner.store(std::move(tr));

            if (learner.ready_to_learn()) {
                const auto batch = learner.sample(setup.acfg.batch_size, sample_rng);
                loss_sum += learner.learn(batch);
                ++learn_calls;
                learner.soft_update(setup.acfg.tau);
            }
            state = std::move(next_state);
        }

        if (cfg.train.audit) {
            for (std::size_t i = 0; i + 1 < episode_log.size(); ++i) {
                if (episode_log[i].next_state != episode_log[i + 1].state)
                    report.transitions_consistent = false;
                ++report.audited_transitions;
            }
        }

        EpisodeRow row;
        row.episode = e;
        const MetricVector m = episode_metrics(sim.episode_stats(), T);
        row.reward = m.total_reward;
        row.latency = m.avg_latency;
        row.energy = m.avg_energy;
        row.cost = m.avg_cost;
        row.throughput = m.throughput;
        row.utilization = m.utilization;
        row.makespan = m.avg_makespan;
        row.epsilon = eps;
        row.td_loss = learn_calls ? loss_sum / double(learn_calls) : 0.0;
        report.episodes.push_back(row);
    }

    report.eval = evaluate(learner, fore ? &*fore : nullptr, cfg, mode, cfg.train.eval_seeds);

    return TrainedArtifacts{std::move(report), std::move(learner), std::move(fore)};
}

} // namespace

forecaster::PretrainResult pretrain_forecaster(const config::ExperimentConfig& cfg) {
    cfg.validate();
    // Phase 1 data comes from a disjoint-seed trace so the forecaster never
    // sees the evaluation workloads.
    workload::TraceParams tp = cfg.trace;
    workload::CongestionParams cp = cfg.congestion;
    workload::MobilityParams mp = cfg.mobility;
    tp.seed = derive_seed(tp.seed, kPhase1Stream);
    cp.seed = derive_seed(cp.seed, kPhase1Stream);
    mp.seed = derive_seed(mp.seed, kPhase1Stream);
    const workload::WorkloadTrace hist = workload::generate(tp, cp, mp);
    const forecaster::HistoryDataset ds = forecaster::build_dataset(hist, cfg.forecast);
    return forecaster::pretrain(ds, cfg.forecast);
}

TrainedArtifacts train_hybrid(const config::ExperimentConfig& cfg) {
    if (cfg.train.mode != config::Mode::hybrid)
        throw InvalidArgument("train_hybrid: config mode is not hybrid");
    return run_training(cfg, config::Mode::hybrid);
}

TrainedArtifacts train_baseline(const config::ExperimentConfig& cfg) {
    if (cfg.train.mode != config::Mode::baseline)
        throw InvalidArgument("train_baseline: config mode is not baseline");
    return run_training(cfg, config::Mode::baseline);
}

EvalSummary evaluate(const agent::DdqnAgent& agent, const nn::Network* forecaster_net,
                     const config::ExperimentConfig& cfg, config::Mode mode,
                     const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw InvalidArgument("evaluate: need at least one seed");
    const bool hybrid = mode == config::Mode::hybrid;
    if (hybrid && forecaster_net == nullptr)
        throw InvalidArgument("evaluate: hybrid mode requires the forecaster network");

    Setup setup = make_setup(cfg, mode);
    if (agent.config().state_dim != setup.acfg.state_dim ||
        agent.config().n_actions != setup.acfg.n_actions)
        throw InvalidArgument("evaluate: checkpoint dimensions do not match the config/mode");

    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());

    env::EdgeCloudEnv sim(cfg.env);
    const std::size_t T = cfg.train.steps_per_episode;
    Rng idle_rng(0); // greedy policy, never consulted

    EvalSummary summary;
    summary.mode = mode;
    summary.seeds = sorted;
    for (const std::uint64_t seed : sorted) {
        env::RawState raw = sim.reset(setup.trace, seed);
        std::vector<double> state;
        for (std::size_t t = 0; t < T; ++t) {
            if (hybrid) {
                const Tensor window = sim.series_window(setup.fcfg.history_window);
                const forecaster::Forecast f =
                    forecaster::forecast(*forecaster_net, window, setup.fcfg);
                state = forecaster::extend_state(raw, f);
            } else {
                state = raw.values;
            }
            const std::size_t flat = agent.select_action(state, 0.0, idle_rng);
            env::StepOutcome out =
                sim.step(to_env_action(flat, mode, sim.action_space(), setup.mid_level));
            raw = std::move(out.next_state);
        }
        summary.per_seed.push_back(episode_metrics(sim.episode_stats(), T));
    }

    const std::size_t n = summary.per_seed.size();
    const std::size_t n_metrics = metric_names().size();
    std::vector<double> mean(n_metrics, 0.0), var(n_metrics, 0.0);
    for (const auto& m : summary.per_seed)
        for (std::size_t i = 0; i < n_metrics; ++i) mean[i] += metric_value(m, i);
    for (auto& v : mean) v /= double(n);
    for (const auto& m : summary.per_seed)
        for (std::size_t i = 0; i < n_metrics; ++i) {
            const double d = metric_value(m, i) - mean[i];
            var[i] += d * d;
        }
    auto assign = [&](MetricVector& out, const std::vector<double>& src) {
        out.total_reward = src[0];
        out.avg_latency = src[1];
        out.avg_energy = src[2];
        out.avg_cost = src[3];
        out.throughput = src[4];
        out.utilization = src[5];
        out.avg_makespan = src[6];
    };
    assign(summary.mean, mean);
    std::vector<double> stddev(n_metrics);
    for (std::size_t i = 0; i < n_metrics; ++i) stddev[i] = std::sqrt(var[i] / double(n));
    assign(summary.stddev, stddev);
    return summary;
}

ComparisonSummary compare(const EvalSummary& baseline, const EvalSummary& hybrid) {
    if (baseline.seeds != hybrid.seeds)
        throw InvalidArgument("compare: evaluations were not run on identical seeds");
    ComparisonSummary cmp;
    for (std::size_t i = 0; i < metric_names().size(); ++i) {
        ComparisonRow row;
        row.metric = metric_names()[i];
        row.baseline = metric_value(baseline.mean, i);
        row.hybrid_mean = metric_value(hybrid.mean, i);
        row.hybrid_std = metric_value(hybrid.stddev, i);
        const double tol =
            1e-9 * std::max({1.0, std::abs(row.baseline), std::abs(row.hybrid_mean)});
        if (std::abs(row.baseline - row.hybrid_mean) <= tol) {
            row.direction = Direction::tie;
        } else if ((row.hybrid_mean > row.baseline) == metric_higher_is_better(i)) {
            row.direction = Direction::hybrid_better;
        } else {
            row.direction = Direction::baseline_better;
        }
        cmp.rows.push_back(row);
    }
    return cmp;
}

ComparisonSummary compare(const TrainingReport& baseline, const TrainingReport& hybrid) {
    return compare(baseline.eval, hybrid.eval);
}

namespace {

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string comparison_table(const ComparisonSummary& cmp) {
    std::vector<std::array<std::string, 4>> cells;
    cells.push_back({"Metric", "Baseline (DDQN)", "Hybrid (Mean +- StdDev)", "Better"});
    for (const auto& row : cmp.rows) {
        cells.push_back({row.metric, fixed4(row.baseline),
                         fixed4(row.hybrid_mean) + " +- " + fixed4(row.hybrid_std),
                         to_string(row.direction)});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& row : cells)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 4; ++c) {
            out += row[c];
            if (c + 1 < 4) out.append(width[c] - row[c].size() + 2, ' ');
        }
        out += "\n";
    }
    return out;
}

void write_metrics_csv(const TrainingReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "episode,reward,latency,energy,cost,throughput,utilization,makespan,epsilon,td_loss\n";
    for (const auto& r : report.episodes) {
        out << r.episode << "," << fmt_double(r.reward) << "," << fmt_double(r.latency) << ","
            << fmt_double(r.energy) << "," << fmt_double(r.cost) << ","
            << fmt_double(r.throughput) << "," << fmt_double(r.utilization) << ","
            << fmt_double(r.makespan) << "," << fmt_double(r.epsilon) << ","
            << fmt_double(r.td_loss) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_evaluation_json(const EvalSummary& summary, const std::filesystem::path& path) {
    json j;
    j["format"] = "peco-evaluation";
    j["version"] = 1;
    j["mode"] = config::to_string(summary.mode);
    j["seeds"] = summary.seeds;
    json metrics;
    for (std::size_t i = 0; i < metric_names().size(); ++i) {
        json m;
        m["mean"] = metric_value(summary.mean, i);
        m["stddev"] = metric_value(summary.stddev, i);
        json per_seed = json::array();
        for (const auto& ms : summary.per_seed) per_seed.push_back(metric_value(ms, i));
        m["per_seed"] = std::move(per_seed);
        metrics[metric_names()[i]] = std::move(m);
    }
    j["metrics"] = std::move(metrics);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

EvalSummary read_evaluation_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": parse error: " + e.what());
    }
    if (j.value("format", "") != "peco-evaluation")
        throw IoError(path.string() + ": not a peco-evaluation file");
    EvalSummary s;
    s.mode = config::mode_from_string(j.at("mode").get<std::string>());
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    const json& metrics = j.at("metrics");
    const std::size_t n = j.at("metrics").at("total_reward").at("per_seed").size();
    s.per_seed.resize(n);
    auto load_metric = [&](std::size_t index, const std::string& name) {
        const json& m = metrics.at(name);
        const double mean = m.at("mean").get<double>();
        const double stddev = m.at("stddev").get<double>();
        const auto per_seed = m.at("per_seed").get<std::vector<double>>();
        if (per_seed.size() != n) throw IoError(path.string() + ": ragged per_seed arrays");
        auto set = [&](MetricVector& mv, double v) {
            switch (index) {
                case 0: mv.total_reward = v; break;
                case 1: mv.avg_latency = v; break;
                case 2: mv.avg_energy = v; break;
                case 3: mv.avg_cost = v; break;
                case 4: mv.throughput = v; break;
                case 5: mv.utilization = v; break;
                case 6: mv.avg_makespan = v; break;
            }
        };
        set(s.mean, mean);
        set(s.stddev, stddev);
        for (std::size_t i = 0; i < n; ++i) set(s.per_seed[i], per_seed[i]);
    };
    for (std::size_t i = 0; i < metric_names().size(); ++i) load_metric(i, metric_names()[i]);
    return s;
}

} // namespace peco::trainer
