#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "peco/errors.hpp"

namespace peco {

/// Deterministic random source. The engine (mt19937_64) is bit-exact per the
/// C++ standard, but the standard *distributions* are not pinned across
/// standard-library implementations, so the samplers here are written out
/// explicitly. Identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw InvalidArgument("Rng::uniform: lo > hi");
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t integer(std::uint64_t n) {
        if (n == 0) throw InvalidArgument("Rng::integer: n must be positive");
        // rejection sampling, no modulo bias
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller. Consumes two draws per call.
    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53; // guard log(0)
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Poisson sample. Knuth multiplication for small rates, normal
    /// approximation above 64 (rates in this project stay far below that).
    std::uint64_t poisson(double lambda) {
        if (lambda < 0.0) throw InvalidArgument("Rng::poisson: negative rate");
        if (lambda == 0.0) return 0;
        if (lambda > 64.0) {
            const double x = std::round(normal(lambda, std::sqrt(lambda)));
            return x <= 0.0 ? 0 : static_cast<std::uint64_t>(x);
        }
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Child seed for a named stream (stream index mixed into the parent seed).
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
    return mix_seed(parent ^ mix_seed(stream));
}

} // namespace peco
