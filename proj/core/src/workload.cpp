#include "peco/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "peco/errors.hpp"
#include "peco/format.hpp"
#include "peco/rng.hpp"

namespace peco::workload {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void require(bool cond, const char* msg) {
    if (!cond) throw InvalidArgument(msg);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

} // namespace

void TraceParams::validate() const {
    require(horizon >= 1, "TraceParams: horizon must be >= 1");
    require(diurnal_period >= 1, "TraceParams: diurnal_period must be >= 1");
    require(base_load >= 0.0 && base_load <= 1.0, "TraceParams: base_load must be in [0,1]");
    require(diurnal_amplitude >= 0.0 && diurnal_amplitude <= 1.0,
            "TraceParams: diurnal_amplitude must be in [0,1]");
    require(burst_rate >= 0.0, "TraceParams: burst_rate must be >= 0");
    require(burst_magnitude >= 0.0, "TraceParams: burst_magnitude must be >= 0");
    require(base_load + diurnal_amplitude + burst_magnitude <= 1.5,
            "TraceParams: base_load + diurnal_amplitude + burst_magnitude must be <= 1.5");
    require(noise_sigma >= 0.0, "TraceParams: noise_sigma must be >= 0");
}

void CongestionParams::validate() const {
    require(mean_bg_traffic >= 0.0 && mean_bg_traffic <= 1.0,
            "CongestionParams: mean_bg_traffic must be in [0,1]");
    require(spike_prob >= 0.0 && spike_prob <= 1.0,
            "CongestionParams: spike_prob must be in [0,1]");
    require(spike_magnitude >= 0.0, "CongestionParams: spike_magnitude must be >= 0");
}

void MobilityParams::validate() const {
    require(n_locations >= 1, "MobilityParams: n_locations must be >= 1");
    require(mean_arrival_rate >= 0.0, "MobilityParams: mean_arrival_rate must be >= 0");
    require(location_drift_prob >= 0.0 && location_drift_prob <= 1.0,
            "MobilityParams: location_drift_prob must be in [0,1]");
    require(task_size_range.first > 0.0 && task_size_range.first <= task_size_range.second,
            "MobilityParams: task_size_range must satisfy 0 < min <= max");
    require(task_data_range.first >= 0.0 && task_data_range.first <= task_data_range.second,
            "MobilityParams: task_data_range must satisfy 0 <= min <= max");
    require(sla_deadline_range.first >= 1 &&
                sla_deadline_range.first <= sla_deadline_range.second,
            "MobilityParams: sla_deadline_range must satisfy 1 <= min <= max");
}

void WorkloadTrace::validate() const {
    require(horizon >= 1, "WorkloadTrace: horizon must be >= 1");
    require(!cpu_series.empty(), "WorkloadTrace: needs at least one cpu series");
    for (const auto& s : cpu_series)
        require(s.size() == horizon, "WorkloadTrace: cpu series length != horizon");
    require(net_series.size() == horizon, "WorkloadTrace: net series length != horizon");
    for (const auto& s : cpu_series)
        for (double v : s) require(v >= 0.0 && v <= 1.0, "WorkloadTrace: cpu value out of [0,1]");
    for (double v : net_series)
        require(v >= 0.0 && v <= 1.0, "WorkloadTrace: net value out of [0,1]");
    std::size_t prev = 0;
    for (const auto& a : arrivals) {
        require(a.arrival_time >= prev, "WorkloadTrace: arrivals not sorted");
        require(a.arrival_time < horizon, "WorkloadTrace: arrival beyond horizon");
        require(a.location < cpu_series.size(), "WorkloadTrace: arrival location out of range");
        require(a.work > 0.0, "WorkloadTrace: task work must be positive");
        require(a.data_size >= 0.0, "WorkloadTrace: task data_size must be >= 0");
        require(a.sla_deadline > 0, "WorkloadTrace: sla_deadline must be positive");
        prev = a.arrival_time;
    }
}

std::vector<std::vector<double>> generate_cpu_trace(const TraceParams& p, std::size_t n_locations) {
    p.validate();
    require(n_locations >= 1, "generate_cpu_trace: n_locations must be >= 1");
    std::vector<std::vector<double>> series(n_locations);
    for (std::size_t loc = 0; loc < n_locations; ++loc) {
        Rng rng(derive_seed(p.seed, loc));
        // stagger diurnal phase across locations so they do not peak together
        const double phase = double(loc) * double(p.diurnal_period) / double(n_locations);
        auto& s = series[loc];
        s.resize(p.horizon);
        for (std::size_t t = 0; t < p.horizon; ++t) {
            double v = p.base_load;
            v += p.diurnal_amplitude *
                 std::sin(kTwoPi * (double(t) + phase) / double(p.diurnal_period));
            if (p.burst_rate > 0.0)
                v += double(rng.poisson(p.burst_rate)) * p.burst_magnitude;
            if (p.noise_sigma > 0.0) v += rng.normal(0.0, p.noise_sigma);
            s[t] = clip01(v);
        }
    }
    return series;
}

std::vector<double> generate_congestion(const CongestionParams& p, std::size_t horizon) {
    p.validate();
    require(horizon >= 1, "generate_congestion: horizon must be >= 1");
    Rng rng(p.seed);
    std::vector<double> out(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        double v = p.mean_bg_traffic;
        if (p.spike_prob > 0.0 && rng.bernoulli(p.spike_prob)) v += p.spike_magnitude;
        out[t] = clip01(v);
    }
    return out;
}

std::vector<TaskArrival> generate_arrivals(const MobilityParams& p, std::size_t horizon) {
    p.validate();
    require(horizon >= 1, "generate_arrivals: horizon must be >= 1");
    Rng rng(p.seed);
    // one mobile source per location; each drifts over locations
    std::vector<std::size_t> position(p.n_locations);
    for (std::size_t i = 0; i < p.n_locations; ++i) position[i] = i;

    std::vector<TaskArrival> out;
    const std::size_t dl_span = p.sla_deadline_range.second - p.sla_deadline_range.first + 1;
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t src = 0; src < p.n_locations; ++src) {
            if (p.location_drift_prob > 0.0 && rng.bernoulli(p.location_drift_prob))
                position[src] = rng.integer(p.n_locations);
            const std::uint64_t count = rng.poisson(p.mean_arrival_rate);
            for (std::uint64_t i = 0; i < count; ++i) {
                TaskArrival a;
                a.arrival_time = t;
                a.location = position[src];
                a.work = rng.uniform(p.task_size_range.first, p.task_size_range.second);
                a.data_size = rng.uniform(p.task_data_range.first, p.task_data_range.second);
                a.sla_deadline = p.sla_deadline_range.first + rng.integer(dl_span);
                out.push_back(a);
            }
        }
    }
    return out; // generated in time order, already sorted
}

WorkloadTrace compose(std::vector<std::vector<double>> cpu_series, std::vector<double> net_series,
                      std::vector<TaskArrival> arrivals) {
    if (cpu_series.empty()) throw InvalidArgument("compose: no cpu series");
    const std::size_t horizon = cpu_series.front().size();
    for (const auto& s : cpu_series)
        if (s.size() != horizon) throw InvalidArgument("compose: cpu series length mismatch");
    if (net_series.size() != horizon)
        throw InvalidArgument("compose: net series length does not match cpu series");
    WorkloadTrace trace;
    trace.cpu_series = std::move(cpu_series);
    trace.net_series = std::move(net_series);
    trace.arrivals = std::move(arrivals);
    trace.horizon = horizon;
    trace.validate();
    return trace;
}

WorkloadTrace generate(const TraceParams& t, const CongestionParams& c, const MobilityParams& m) {
    return compose(generate_cpu_trace(t, m.n_locations), generate_congestion(c, t.horizon),
                   generate_arrivals(m, t.horizon));
}

void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
    trace.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "peco-trace 1\n";
    out << trace.horizon << " " << trace.n_locations() << "\n";
    for (std::size_t t = 0; t < trace.horizon; ++t) {
        for (std::size_t loc = 0; loc < trace.n_locations(); ++loc) {
            out << fmt_double(trace.cpu_series[loc][t]) << ",";
        }
        out << fmt_double(trace.net_series[t]) << "\n";
    }
    out << "arrivals " << trace.arrivals.size() << "\n";
    for (const auto& a : trace.arrivals) {
        out << a.arrival_time << "," << a.location << "," << fmt_double(a.work) << ","
            << fmt_double(a.data_size) << "," << a.sla_deadline << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

WorkloadTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            throw IoError(path.string() + ": unexpected end of file at line " +
                          std::to_string(lineno + 1));
        ++lineno;
    };

    next_line();
    if (line != "peco-trace 1")
        throw IoError(path.string() + ":1: not a peco-trace file");
    next_line();
    {
        std::istringstream hdr(line);
        std::size_t horizon = 0, locations = 0;
        if (!(hdr >> horizon >> locations) || horizon == 0 || locations == 0)
            throw IoError(path.string() + ":2: bad header");
        WorkloadTrace trace;
        trace.horizon = horizon;
        trace.cpu_series.assign(locations, std::vector<double>(horizon));
        trace.net_series.assign(horizon, 0.0);
        for (std::size_t t = 0; t < horizon; ++t) {
            next_line();
            const auto cells = split(line, ',');
            if (cells.size() != locations + 1)
                throw IoError(path.string() + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(locations + 1) + " columns");
            for (std::size_t loc = 0; loc < locations; ++loc)
                trace.cpu_series[loc][t] = parse_double(cells[loc], "cpu value");
            trace.net_series[t] = parse_double(cells[locations], "net value");
        }
        next_line();
        std::istringstream ah(line);
        std::string word;
        std::size_t count = 0;
        if (!(ah >> word >> count) || word != "arrivals")
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected arrivals header");
        trace.arrivals.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            next_line();
            const auto cells = split(line, ',');
            if (cells.size() != 5)
                throw IoError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 5 columns for arrival");
            TaskArrival a;
            a.arrival_time = parse_u64(cells[0], "arrival_time");
            a.location = parse_u64(cells[1], "location");
            a.work = parse_double(cells[2], "work");
            a.data_size = parse_double(cells[3], "data_size");
            a.sla_deadline = parse_u64(cells[4], "sla_deadline");
            trace.arrivals.push_back(a);
        }
        trace.validate();
        return trace;
    }
}

} // namespace peco::workload
