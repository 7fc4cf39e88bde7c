#include <doctest.h>

#include <cmath>

#include "peco/rng.hpp"

using peco::Rng;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.raw() == b.raw());
}

TEST_CASE("uniform stays in [0,1)") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    Rng rng(9);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("poisson mean matches rate") {
    Rng rng(11);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += double(rng.poisson(0.7));
    CHECK(sum / n == doctest::Approx(0.7).epsilon(0.03));
}

TEST_CASE("integer covers the range without bias") {
    Rng rng(13);
    int counts[5] = {0, 0, 0, 0, 0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[rng.integer(5)]++;
    for (int c : counts) CHECK(std::abs(c - n / 5) < 600);
}

TEST_CASE("derive_seed separates streams") {
    CHECK(peco::derive_seed(1, 0) != peco::derive_seed(1, 1));
    CHECK(peco::derive_seed(1, 0) != peco::derive_seed(2, 0));
    CHECK(peco::derive_seed(5, 3) == peco::derive_seed(5, 3));
}
