#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "peco/artifacts.hpp"
#include "peco/errors.hpp"
#include "peco/rng.hpp"
#include "peco/workload.hpp"

using namespace peco;
using namespace peco::workload;

TEST_CASE("cpu trace with all stochastic terms disabled is the constant base load") {
    TraceParams p;
    p.horizon = 50;
    p.base_load = 0.4;
    p.diurnal_amplitude = 0.0;
    p.burst_rate = 0.0;
    p.noise_sigma = 0.0;
    const auto series = generate_cpu_trace(p, 2);
    for (const auto& s : series)
        for (double v : s) CHECK(v == 0.4);
}

TEST_CASE("stochastic terms off reproduces the closed-form deterministic signal") {
    TraceParams p;
    p.horizon = 400;
    p.base_load = 0.5;
    p.diurnal_amplitude = 0.2;
    p.diurnal_period = 100;
    p.burst_rate = 0.0;
    p.noise_sigma = 0.0;
    const auto series = generate_cpu_trace(p, 1);
    for (std::size_t t = 0; t < p.horizon; ++t) {
        const double expected =
            0.5 + 0.2 * std::sin(2.0 * 3.14159265358979323846 * double(t) / 100.0);
        CHECK(series[0][t] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("identical seeds produce bitwise-identical cpu traces") {
    TraceParams p;
    p.horizon = 300;
    const auto a = generate_cpu_trace(p, 3);
    const auto b = generate_cpu_trace(p, 3);
    CHECK(a == b);
    TraceParams q = p;
    q.seed += 1;
    CHECK(generate_cpu_trace(q, 3) != a);
}

TEST_CASE("cpu trace sample mean sits near base load") {
    // sine and zero-mean noise cancel in expectation
    TraceParams p;
    p.horizon = 10000;
    p.base_load = 0.3;
    p.diurnal_amplitude = 0.2;
    p.diurnal_period = 200;
    p.burst_rate = 0.0;
    p.noise_sigma = 0.05;
    const auto series = generate_cpu_trace(p, 1);
    const double mean =
        std::accumulate(series[0].begin(), series[0].end(), 0.0) / double(p.horizon);
    CHECK(mean > 0.27);
    CHECK(mean < 0.33);
}

TEST_CASE("zero horizon is rejected") {
    TraceParams p;
    p.horizon = 0;
    CHECK_THROWS_AS(generate_cpu_trace(p, 1), InvalidArgument);
}

TEST_CASE("congestion with no spikes is constant; certain spikes add the magnitude") {
    CongestionParams p;
    p.mean_bg_traffic = 0.2;
    p.spike_magnitude = 0.3;
    p.spike_prob = 0.0;
    for (double v : generate_congestion(p, 20)) CHECK(v == 0.2);
    p.spike_prob = 1.0;
    for (double v : generate_congestion(p, 20)) CHECK(v == 0.5);
}

TEST_CASE("congestion spike count lands in the binomial band") {
    CongestionParams p;
    p.spike_prob = 0.1;
    p.mean_bg_traffic = 0.1;
    p.spike_magnitude = 0.5;
    const auto series = generate_congestion(p, 10000);
    int spikes = 0;
    for (double v : series)
        if (v > 0.3) ++spikes;
    CHECK(spikes >= 850);
    CHECK(spikes <= 1150);
}

TEST_CASE("arrivals: zero rate gives empty list; single location pins location 0") {
    MobilityParams p;
    p.mean_arrival_rate = 0.0;
    CHECK(generate_arrivals(p, 100).empty());

    MobilityParams q;
    q.n_locations = 1;
    q.mean_arrival_rate = 0.5;
    for (const auto& a : generate_arrivals(q, 200)) CHECK(a.location == 0);
}

TEST_CASE("arrival count lands in the Poisson band") {
    MobilityParams p;
    p.n_locations = 2;
    p.mean_arrival_rate = 0.5;
    const auto arrivals = generate_arrivals(p, 10000);
    CHECK(arrivals.size() >= 9400);
    CHECK(arrivals.size() <= 10600);
}

TEST_CASE("arrivals respect ranges and ordering") {
    MobilityParams p;
    p.n_locations = 3;
    p.mean_arrival_rate = 0.4;
    p.location_drift_prob = 0.2;
    const auto arrivals = generate_arrivals(p, 500);
    std::size_t prev = 0;
    for (const auto& a : arrivals) {
        CHECK(a.arrival_time >= prev);
        CHECK(a.arrival_time < 500);
        CHECK(a.location < 3);
        CHECK(a.work >= p.task_size_range.first);
        CHECK(a.work <= p.task_size_range.second);
        CHECK(a.data_size >= p.task_data_range.first);
        CHECK(a.data_size <= p.task_data_range.second);
        CHECK(a.sla_deadline >= p.sla_deadline_range.first);
        CHECK(a.sla_deadline <= p.sla_deadline_range.second);
        prev = a.arrival_time;
    }
}

TEST_CASE("compose assembles a valid trace and rejects length mismatches") {
    TraceParams tp;
    tp.horizon = 100;
    CongestionParams cp;
    const auto cpu = generate_cpu_trace(tp, 2);
    const auto net = generate_congestion(cp, 100);

    const WorkloadTrace trace = compose(cpu, net, {});
    CHECK(trace.horizon == 100);
    CHECK(trace.arrivals.empty());
    CHECK_NOTHROW(trace.validate());

    CHECK_THROWS_AS(compose(cpu, generate_congestion(cp, 99), {}), InvalidArgument);
}

TEST_CASE("full pipeline is stable across runs") {
    TraceParams tp;
    tp.horizon = 500;
    CongestionParams cp;
    MobilityParams mp;
    const WorkloadTrace a = generate(tp, cp, mp);
    const WorkloadTrace b = generate(tp, cp, mp);
    CHECK(a == b);
}

TEST_CASE("every series value stays in [0,1] over randomized parameters") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        TraceParams p;
        p.horizon = 200;
        p.base_load = rng.uniform(0.0, 1.0);
        p.diurnal_amplitude = rng.uniform(0.0, std::min(1.0, 1.5 - p.base_load));
        p.diurnal_period = 1 + std::size_t(rng.integer(300));
        p.burst_magnitude =
            rng.uniform(0.0, std::max(0.0, 1.5 - p.base_load - p.diurnal_amplitude));
        p.burst_rate = rng.uniform(0.0, 0.5);
        p.noise_sigma = rng.uniform(0.0, 0.2);
        p.seed = rng.raw();
        for (const auto& s : generate_cpu_trace(p, 2))
            for (double v : s) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }

        CongestionParams c;
        c.mean_bg_traffic = rng.uniform(0.0, 1.0);
        c.spike_prob = rng.uniform(0.0, 1.0);
        c.spike_magnitude = rng.uniform(0.0, 2.0);
        c.seed = rng.raw();
        for (double v : generate_congestion(c, 300)) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("trace text round-trip is lossless") {
    TraceParams tp;
    tp.horizon = 120;
    CongestionParams cp;
    MobilityParams mp;
    mp.mean_arrival_rate = 0.6;
    const WorkloadTrace trace = generate(tp, cp, mp);

    const auto path = std::filesystem::temp_directory_path() / "peco_trace_rt.txt";
    save_trace(trace, path);
    const WorkloadTrace loaded = load_trace(path);
    CHECK(loaded == trace);

    // byte-identical re-serialization
    const std::string first = artifacts::read_text(path);
    save_trace(loaded, path);
    CHECK(artifacts::read_text(path) == first);
    std::filesystem::remove(path);
}

TEST_CASE("trace loader reports malformed files with line context") {
    const auto path = std::filesystem::temp_directory_path() / "peco_trace_bad.txt";
    artifacts::write_text(path, "peco-trace 1\n3 1\n0.1,0.2\nnot-a-number,0.2\n");
    CHECK_THROWS_AS(load_trace(path), IoError);
    std::filesystem::remove(path);
}
