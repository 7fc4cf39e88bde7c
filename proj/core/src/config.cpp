#include "peco/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "peco/errors.hpp"
#include "peco/format.hpp"
#include "peco/rng.hpp"

namespace peco::config {

const char* to_string(Mode m) { return m == Mode::baseline ? "baseline" : "hybrid"; }

Mode mode_from_string(const std::string& s) {
    if (s == "baseline") return Mode::baseline;
    if (s == "hybrid") return Mode::hybrid;
    throw InvalidArgument("train.mode: expected 'baseline' or 'hybrid', got '" + s + "'");
}

void TrainSettings::validate() const {
    if (episodes == 0) throw InvalidArgument("train.episodes: must be >= 1");
    if (steps_per_episode == 0) throw InvalidArgument("train.steps_per_episode: must be >= 1");
    if (eval_seeds.empty()) throw InvalidArgument("train.eval_seeds: need at least one seed");
}

namespace {

env::NodeProfile default_local_node() {
    return {env::Tier::local, 3.0, 50.0, 0.0, 0.5, 0.05, 0.0};
}
env::NodeProfile default_edge_node() {
    return {env::Tier::edge, 8.0, 200.0, 0.5, 2.5, 0.1, 3.0};
}
env::NodeProfile default_cloud_node() {
    return {env::Tier::cloud, 50.0, 10000.0, 2.0, 5.0, 0.2, 10.0};
}

void assemble_nodes(env::EnvConfig& e, const env::NodeProfile& local,
                    const env::NodeProfile& edge, std::size_t n_edge,
                    const env::NodeProfile& cloud) {
    e.nodes.clear();
    e.nodes.push_back(local);
    for (std::size_t i = 0; i < n_edge; ++i) e.nodes.push_back(edge);
    e.nodes.push_back(cloud);
}

struct ParsedFile {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, std::size_t>>> values;
    std::string origin;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = values.find(sec);
        if (s == values.end()) return false;
        return s->second.count(key) > 0;
    }
    std::string take(const std::string& sec, const std::string& key) {
        return values.at(sec).at(key).first;
    }
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

ParsedFile parse_ini(const std::string& text, const std::string& origin) {
    ParsedFile pf;
    pf.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw IoError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw IoError(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw IoError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw IoError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (pf.values[section].count(key))
            throw IoError(origin + ":" + std::to_string(lineno) + ": duplicate key " + section +
                          "." + key);
        pf.values[section][key] = {value, lineno};
    }
    return pf;
}

/// Typed reader that records consumed keys so leftovers can be reported.
class Reader {
public:
    Reader(ParsedFile&& pf) : pf_(std::move(pf)) {}

    template <typename T, typename Fn>
    void get(const std::string& sec, const std::string& key, T& out, Fn parse) {
        if (!pf_.has(sec, key)) return;
        consumed_[sec].insert(consumed_[sec].end(), key);
        const auto& [raw, line] = pf_.values.at(sec).at(key);
        try {
            out = parse(raw);
        } catch (const Error& e) {
            throw IoError(pf_.origin + ":" + std::to_string(line) + ": " + sec + "." + key + ": " +
                          e.what());
        }
    }

    void get_double(const std::string& sec, const std::string& key, double& out) {
        get(sec, key, out, [&](const std::string& s) { return parse_double(s, "value"); });
    }
    void get_size(const std::string& sec, const std::string& key, std::size_t& out) {
        get(sec, key, out,
            [&](const std::string& s) { return std::size_t(parse_u64(s, "value")); });
    }
    void get_u64(const std::string& sec, const std::string& key, std::uint64_t& out) {
        get(sec, key, out, [&](const std::string& s) { return parse_u64(s, "value"); });
    }
    void get_bool(const std::string& sec, const std::string& key, bool& out) {
        get(sec, key, out, [&](const std::string& s) {
            if (s == "true") return true;
            if (s == "false") return false;
            throw IoError("expected true or false");
        });
    }
    void get_string(const std::string& sec, const std::string& key, std::string& out) {
        get(sec, key, out, [&](const std::string& s) { return s; });
    }
    void get_u64_list(const std::string& sec, const std::string& key,
                      std::vector<std::uint64_t>& out) {
        get(sec, key, out, [&](const std::string& s) {
            std::vector<std::uint64_t> v;
            std::istringstream ss(s);
            std::string cell;
            while (std::getline(ss, cell, ',')) v.push_back(parse_u64(trim(cell), "list entry"));
            if (v.empty()) throw IoError("empty list");
            return v;
        });
    }
    void get_size_list(const std::string& sec, const std::string& key,
                       std::vector<std::size_t>& out) {
        std::vector<std::uint64_t> tmp;
        bool had = pf_.has(sec, key);
        get_u64_list(sec, key, tmp);
        if (had) {
            out.clear();
            for (auto v : tmp) out.push_back(std::size_t(v));
        }
    }

    bool has(const std::string& sec, const std::string& key) const { return pf_.has(sec, key); }

    void reject_unknown() const {
        for (const auto& [sec, keys] : pf_.values) {
            const auto it = consumed_.find(sec);
            for (const auto& [key, val] : keys) {
                const bool known =
                    it != consumed_.end() &&
                    std::find(it->second.begin(), it->second.end(), key) != it->second.end();
                if (!known)
                    throw IoError(pf_.origin + ":" + std::to_string(val.second) +
                                  ": unknown key " + sec + "." + key);
            }
        }
    }

private:
    ParsedFile pf_;
    std::map<std::string, std::vector<std::string>> consumed_;
};

void read_node(Reader& r, const std::string& sec, env::NodeProfile& n) {
    r.get_double(sec, "cpu_capacity", n.cpu_capacity);
    r.get_double(sec, "mem_capacity", n.mem_capacity);
    r.get_double(sec, "link_latency", n.link_latency);
    r.get_double(sec, "energy_per_work", n.energy_per_work);
    r.get_double(sec, "energy_idle", n.energy_idle);
    r.get_double(sec, "cost_per_work", n.cost_per_work);
}

} // namespace

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    assemble_nodes(cfg.env, default_local_node(), default_edge_node(), cfg.mobility.n_locations,
                   default_cloud_node());
    cfg.env.steps_per_episode = cfg.train.steps_per_episode;
    cfg.forecast.input_channels = cfg.mobility.n_locations + 1;
    cfg.agent.eps_decay =
        double(cfg.train.episodes) * double(cfg.train.steps_per_episode) / 5.0;
    return cfg;
}

void ExperimentConfig::validate() const {
    trace.validate();
    congestion.validate();
    mobility.validate();
    env.validate();
    forecast.validate();
    agent.validate_hyper();
    train.validate();
    if (env.nodes.size() != mobility.n_locations + 2)
        throw InvalidArgument("node.edge.count must equal mobility.n_locations (one edge server "
                              "per location)");
    if (forecast.input_channels != mobility.n_locations + 1)
        throw InvalidArgument("forecast.input_channels is derived: n_locations + 1");
    if (env.steps_per_episode != train.steps_per_episode)
        throw InvalidArgument("train.steps_per_episode is the single source of the episode length");
    if (trace.horizon < train.steps_per_episode)
        throw InvalidArgument("workload.horizon must be >= train.steps_per_episode");
    if (trace.horizon < forecast.history_window + forecast.horizon)
        throw InvalidArgument("workload.horizon must cover forecast.history_window + horizon");
}

ExperimentConfig load_config_text(const std::string& text, const std::string& origin) {
    Reader r(parse_ini(text, origin));
    ExperimentConfig cfg;

    r.get_size("workload", "horizon", cfg.trace.horizon);
    r.get_double("workload", "base_load", cfg.trace.base_load);
    r.get_double("workload", "diurnal_amplitude", cfg.trace.diurnal_amplitude);
    r.get_size("workload", "diurnal_period", cfg.trace.diurnal_period);
    r.get_double("workload", "burst_rate", cfg.trace.burst_rate);
    r.get_double("workload", "burst_magnitude", cfg.trace.burst_magnitude);
    r.get_double("workload", "noise_sigma", cfg.trace.noise_sigma);
    r.get_u64("workload", "seed", cfg.trace.seed);

    r.get_double("congestion", "mean_bg_traffic", cfg.congestion.mean_bg_traffic);
    r.get_double("congestion", "spike_prob", cfg.congestion.spike_prob);
    r.get_double("congestion", "spike_magnitude", cfg.congestion.spike_magnitude);
    r.get_u64("congestion", "seed", cfg.congestion.seed);

    r.get_size("mobility", "n_locations", cfg.mobility.n_locations);
    r.get_double("mobility", "mean_arrival_rate", cfg.mobility.mean_arrival_rate);
    r.get_double("mobility", "location_drift_prob", cfg.mobility.location_drift_prob);
    r.get_double("mobility", "task_size_min", cfg.mobility.task_size_range.first);
    r.get_double("mobility", "task_size_max", cfg.mobility.task_size_range.second);
    r.get_double("mobility", "task_data_min", cfg.mobility.task_data_range.first);
    r.get_double("mobility", "task_data_max", cfg.mobility.task_data_range.second);
    r.get_size("mobility", "sla_deadline_min", cfg.mobility.sla_deadline_range.first);
    r.get_size("mobility", "sla_deadline_max", cfg.mobility.sla_deadline_range.second);
    r.get_u64("mobility", "seed", cfg.mobility.seed);

    env::NodeProfile local = default_local_node();
    env::NodeProfile edge = default_edge_node();
    env::NodeProfile cloud = default_cloud_node();
    std::size_t n_edge = cfg.mobility.n_locations;
    read_node(r, "node.local", local);
    read_node(r, "node.edge", edge);
    r.get_size("node.edge", "count", n_edge);
    read_node(r, "node.cloud", cloud);

    r.get_double("reward", "w_latency", cfg.env.reward.w_latency);
    r.get_double("reward", "w_energy", cfg.env.reward.w_energy);
    r.get_double("reward", "w_cost", cfg.env.reward.w_cost);
    r.get_double("reward", "w_violation", cfg.env.reward.w_violation);
    r.get_double("reward", "sla_penalty", cfg.env.reward.sla_penalty);
    r.get_double("reward", "latency_min", cfg.env.reward.latency_bounds.lo);
    r.get_double("reward", "latency_max", cfg.env.reward.latency_bounds.hi);
    r.get_double("reward", "energy_min", cfg.env.reward.energy_bounds.lo);
    r.get_double("reward", "energy_max", cfg.env.reward.energy_bounds.hi);
    r.get_double("reward", "cost_min", cfg.env.reward.cost_bounds.lo);
    r.get_double("reward", "cost_max", cfg.env.reward.cost_bounds.hi);

    r.get_size("env", "alloc_dims", cfg.env.alloc_dims);
    r.get_size("env", "alloc_levels", cfg.env.alloc_levels);
    r.get_size("env", "history", cfg.env.history);
    r.get_double("env", "queue_norm", cfg.env.queue_norm);
    r.get_double("env", "work_norm", cfg.env.work_norm);
    r.get_double("env", "data_norm", cfg.env.data_norm);
    r.get_double("env", "deadline_norm", cfg.env.deadline_norm);

    r.get_size("forecast", "history_window", cfg.forecast.history_window);
    r.get_size("forecast", "horizon", cfg.forecast.horizon);
    r.get_size("forecast", "conv_channels", cfg.forecast.conv_channels);
    r.get_size("forecast", "kernel_width", cfg.forecast.kernel_width);
    r.get_size("forecast", "lstm_hidden", cfg.forecast.lstm_hidden);
    r.get_size("forecast", "train_epochs", cfg.forecast.train_epochs);
    r.get_size("forecast", "batch_size", cfg.forecast.batch_size);
    r.get_double("forecast", "lr", cfg.forecast.lr);
    r.get_u64("forecast", "seed", cfg.forecast.seed);

    r.get_size_list("agent", "hidden", cfg.agent.hidden);
    r.get_double("agent", "gamma", cfg.agent.gamma);
    r.get_double("agent", "eps_start", cfg.agent.eps_start);
    r.get_double("agent", "eps_end", cfg.agent.eps_end);
    cfg.eps_decay_explicit = r.has("agent", "eps_decay");
    r.get_double("agent", "eps_decay", cfg.agent.eps_decay);
    r.get_double("agent", "tau", cfg.agent.tau);
    r.get_size("agent", "capacity", cfg.agent.capacity);
    r.get_size("agent", "batch_size", cfg.agent.batch_size);
    r.get_size("agent", "learn_start", cfg.agent.learn_start);
    r.get_double("agent", "lr", cfg.agent.lr);
    r.get_u64("agent", "seed", cfg.agent.seed);

    std::string mode = "hybrid";
    r.get_string("train", "mode", mode);
    cfg.train.mode = mode_from_string(mode);
    r.get_size("train", "episodes", cfg.train.episodes);
    r.get_size("train", "steps_per_episode", cfg.train.steps_per_episode);
    r.get_u64("train", "episode_seed", cfg.train.episode_seed);
    r.get_u64_list("train", "eval_seeds", cfg.train.eval_seeds);
    r.get_bool("train", "audit", cfg.train.audit);

    r.reject_unknown();

    // derived values
    assemble_nodes(cfg.env, local, edge, n_edge, cloud);
    cfg.env.steps_per_episode = cfg.train.steps_per_episode;
    cfg.forecast.input_channels = cfg.mobility.n_locations + 1;
    if (!cfg.eps_decay_explicit)
        cfg.agent.eps_decay =
            double(cfg.train.episodes) * double(cfg.train.steps_per_episode) / 5.0;

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_config_text(text, path.string());
}

namespace {

void echo_node(std::ostringstream& out, const char* name, const env::NodeProfile& n) {
    out << "[node." << name << "]\n";
    out << "cpu_capacity = " << fmt_double(n.cpu_capacity) << "\n";
    out << "mem_capacity = " << fmt_double(n.mem_capacity) << "\n";
    out << "link_latency = " << fmt_double(n.link_latency) << "\n";
    out << "energy_per_work = " << fmt_double(n.energy_per_work) << "\n";
    out << "energy_idle = " << fmt_double(n.energy_idle) << "\n";
    out << "cost_per_work = " << fmt_double(n.cost_per_work) << "\n";
}

} // namespace

std::string echo_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "# resolved peco experiment configuration\n";
    out << "[workload]\n";
    out << "horizon = " << cfg.trace.horizon << "\n";
    out << "base_load = " << fmt_double(cfg.trace.base_load) << "\n";
    out << "diurnal_amplitude = " << fmt_double(cfg.trace.diurnal_amplitude) << "\n";
    out << "diurnal_period = " << cfg.trace.diurnal_period << "\n";
    out << "burst_rate = " << fmt_double(cfg.trace.burst_rate) << "\n";
    out << "burst_magnitude = " << fmt_double(cfg.trace.burst_magnitude) << "\n";
    out << "noise_sigma = " << fmt_double(cfg.trace.noise_sigma) << "\n";
    out << "seed = " << cfg.trace.seed << "\n";
    out << "\n[congestion]\n";
    out << "mean_bg_traffic = " << fmt_double(cfg.congestion.mean_bg_traffic) << "\n";
    out << "spike_prob = " << fmt_double(cfg.congestion.spike_prob) << "\n";
    out << "spike_magnitude = " << fmt_double(cfg.congestion.spike_magnitude) << "\n";
    out << "seed = " << cfg.congestion.seed << "\n";
    out << "\n[mobility]\n";
    out << "n_locations = " << cfg.mobility.n_locations << "\n";
    out << "mean_arrival_rate = " << fmt_double(cfg.mobility.mean_arrival_rate) << "\n";
    out << "location_drift_prob = " << fmt_double(cfg.mobility.location_drift_prob) << "\n";
    out << "task_size_min = " << fmt_double(cfg.mobility.task_size_range.first) << "\n";
    out << "task_size_max = " << fmt_double(cfg.mobility.task_size_range.second) << "\n";
    out << "task_data_min = " << fmt_double(cfg.mobility.task_data_range.first) << "\n";
    out << "task_data_max = " << fmt_double(cfg.mobility.task_data_range.second) << "\n";
    out << "sla_deadline_min = " << cfg.mobility.sla_deadline_range.first << "\n";
    out << "sla_deadline_max = " << cfg.mobility.sla_deadline_range.second << "\n";
    out << "seed = " << cfg.mobility.seed << "\n\n";
    echo_node(out, "local", cfg.env.nodes.front());
    out << "\n";
    echo_node(out, "edge", cfg.env.nodes.at(1));
    out << "count = " << cfg.env.nodes.size() - 2 << "\n";
    out << "\n";
    echo_node(out, "cloud", cfg.env.nodes.back());
    out << "\n[reward]\n";
    out << "w_latency = " << fmt_double(cfg.env.reward.w_latency) << "\n";
    out << "w_energy = " << fmt_double(cfg.env.reward.w_energy) << "\n";
    out << "w_cost = " << fmt_double(cfg.env.reward.w_cost) << "\n";
    out << "w_violation = " << fmt_double(cfg.env.reward.w_violation) << "\n";
    out << "sla_penalty = " << fmt_double(cfg.env.reward.sla_penalty) << "\n";
    out << "latency_min = " << fmt_double(cfg.env.reward.latency_bounds.lo) << "\n";
    out << "latency_max = " << fmt_double(cfg.env.reward.latency_bounds.hi) << "\n";
    out << "energy_min = " << fmt_double(cfg.env.reward.energy_bounds.lo) << "\n";
    out << "energy_max = " << fmt_double(cfg.env.reward.energy_bounds.hi) << "\n";
    out << "cost_min = " << fmt_double(cfg.env.reward.cost_bounds.lo) << "\n";
    out << "cost_max = " << fmt_double(cfg.env.reward.cost_bounds.hi) << "\n";
    out << "\n[env]\n";
    out << "alloc_dims = " << cfg.env.alloc_dims << "\n";
    out << "alloc_levels = " << cfg.env.alloc_levels << "\n";
    out << "history = " << cfg.env.history << "\n";
    out << "queue_norm = " << fmt_double(cfg.env.queue_norm) << "\n";
    out << "work_norm = " << fmt_double(cfg.env.work_norm) << "\n";
    out << "data_norm = " << fmt_double(cfg.env.data_norm) << "\n";
    out << "deadline_norm = " << fmt_double(cfg.env.deadline_norm) << "\n";
    out << "\n[forecast]\n";
    out << "history_window = " << cfg.forecast.history_window << "\n";
    out << "horizon = " << cfg.forecast.horizon << "\n";
    out << "conv_channels = " << cfg.forecast.conv_channels << "\n";
    out << "kernel_width = " << cfg.forecast.kernel_width << "\n";
    out << "lstm_hidden = " << cfg.forecast.lstm_hidden << "\n";
    out << "train_epochs = " << cfg.forecast.train_epochs << "\n";
    out << "batch_size = " << cfg.forecast.batch_size << "\n";
    out << "lr = " << fmt_double(cfg.forecast.lr) << "\n";
    out << "seed = " << cfg.forecast.seed << "\n";
    out << "\n[agent]\n";
    out << "hidden = ";
    for (std::size_t i = 0; i < cfg.agent.hidden.size(); ++i)
        out << (i ? "," : "") << cfg.agent.hidden[i];
    out << "\n";
    out << "gamma = " << fmt_double(cfg.agent.gamma) << "\n";
    out << "eps_start = " << fmt_double(cfg.agent.eps_start) << "\n";
    out << "eps_end = " << fmt_double(cfg.agent.eps_end) << "\n";
    out << "eps_decay = " << fmt_double(cfg.agent.eps_decay) << "\n";
    out << "tau = " << fmt_double(cfg.agent.tau) << "\n";
    out << "capacity = " << cfg.agent.capacity << "\n";
    out << "batch_size = " << cfg.agent.batch_size << "\n";
    out << "learn_start = " << cfg.agent.learn_start << "\n";
    out << "lr = " << fmt_double(cfg.agent.lr) << "\n";
    out << "seed = " << cfg.agent.seed << "\n";
    out << "\n[train]\n";
    out << "mode = " << to_string(cfg.train.mode) << "\n";
    out << "episodes = " << cfg.train.episodes << "\n";
    out << "steps_per_episode = " << cfg.train.steps_per_episode << "\n";
    out << "episode_seed = " << cfg.train.episode_seed << "\n";
    out << "eval_seeds = ";
    for (std::size_t i = 0; i < cfg.train.eval_seeds.size(); ++i)
        out << (i ? "," : "") << cfg.train.eval_seeds[i];
    out << "\n";
    out << "audit = " << (cfg.train.audit ? "true" : "false") << "\n";
    return out.str();
}

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.trace.seed = derive_seed(seed, 0);
    cfg.congestion.seed = derive_seed(seed, 1);
    cfg.mobility.seed = derive_seed(seed, 2);
    cfg.forecast.seed = derive_seed(seed, 3);
    cfg.agent.seed = derive_seed(seed, 4);
    cfg.train.episode_seed = derive_seed(seed, 5);
}

} // namespace peco::config
