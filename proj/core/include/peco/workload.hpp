#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace peco::workload {

/// Synthetic CPU-demand trace: base level + diurnal sinusoid + Poisson
/// bursts + Gaussian noise, clipped to [0,1].
struct TraceParams {
    std::size_t horizon = 2000;
    double base_load = 0.35;
    double diurnal_amplitude = 0.25;
    std::size_t diurnal_period = 200;
    double burst_rate = 0.05;      // expected bursts per timestep
    double burst_magnitude = 0.3;  // added per burst
    double noise_sigma = 0.03;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const TraceParams&) const = default;
};

/// Background network congestion: constant mean + Bernoulli spikes.
struct CongestionParams {
    double mean_bg_traffic = 0.15;
    double spike_prob = 0.08;
    double spike_magnitude = 0.4;
    std::uint64_t seed = 2;

    void validate() const;
    bool operator==(const CongestionParams&) const = default;
};

/// Task arrivals from mobile sources: one source per location, Poisson
/// arrivals per source per timestep, sources drift between locations.
struct MobilityParams {
    std::size_t n_locations = 2;
    double mean_arrival_rate = 0.35; // tasks per timestep per location
    double location_drift_prob = 0.05;
    std::pair<double, double> task_size_range{1.0, 6.0};   // work units
    std::pair<double, double> task_data_range{0.5, 2.0};   // data units
    std::pair<std::size_t, std::size_t> sla_deadline_range{6, 18}; // timesteps

    std::uint64_t seed = 3;

    void validate() const;
    bool operator==(const MobilityParams&) const = default;
};

struct TaskArrival {
    std::size_t arrival_time = 0;
    std::size_t location = 0;
    double work = 0.0;
    double data_size = 0.0;
    std::size_t sla_deadline = 0;

    bool operator==(const TaskArrival&) const = default;
};

struct WorkloadTrace {
    std::vector<std::vector<double>> cpu_series; // [location][t], values in [0,1]
    std::vector<double> net_series;              // [t], values in [0,1]
    std::vector<TaskArrival> arrivals;           // sorted by arrival_time, all < horizon
    std::size_t horizon = 0;

    std::size_t n_locations() const { return cpu_series.size(); }
    void validate() const;
    bool operator==(const WorkloadTrace&) const = default;
};

std::vector<std::vector<double>> generate_cpu_trace(const TraceParams& p, std::size_t n_locations);
std::vector<double> generate_congestion(const CongestionParams& p, std::size_t horizon);
std::vector<TaskArrival> generate_arrivals(const MobilityParams& p, std::size_t horizon);

/// Pure assembly; validates lengths and arrival ordering.
WorkloadTrace compose(std::vector<std::vector<double>> cpu_series, std::vector<double> net_series,
                      std::vector<TaskArrival> arrivals);

/// Full pipeline: cpu + congestion + arrivals with the mobility location count.
WorkloadTrace generate(const TraceParams& t, const CongestionParams& c, const MobilityParams& m);

/// Line-oriented text format, lossless round-trip. See docs/formats.md.
void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path);
WorkloadTrace load_trace(const std::filesystem::path& path);

} // namespace peco::workload
