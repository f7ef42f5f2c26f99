#include "safempd/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

using namespace safempd;

TEST_CASE("same seed reproduces the sequence") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(43);
    bool differs = false;
    RngStream a2(42);
    for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
    CHECK(differs);
}

TEST_CASE("child derivation is pure and order independent") {
    RngStream root(7);
    const std::uint64_t direct = root.at(3).next_u64();
    // Deriving other children or drawing from them must not disturb at(3).
    RngStream r2(7);
    (void)r2.at(1).next_u64();
    (void)r2.at(2).next_u64();
    (void)r2.at(9, 4).next_u64();
    CHECK(r2.at(3).next_u64() == direct);

    // Derivation does not advance the parent stream.
    RngStream p(11), q(11);
    (void)p.at(5);
    (void)p.at(6, 7);
    CHECK(p.next_u64() == q.next_u64());
}

TEST_CASE("distinct paths give distinct streams") {
    RngStream root(1234);
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a) {
        seen.insert(root.at(a).next_u64());
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(root.at(a, b).next_u64());
    }
    // 20 + 400 draws; collisions would indicate a broken mix.
    CHECK(seen.size() == 420);
    CHECK(root.at(2, 3).next_u64() != root.at(3, 2).next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and is roughly uniform") {
    RngStream rng(99);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform(lo,hi) respects bounds") {
    RngStream rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-2.5, 4.0);
        REQUIRE(u >= -2.5);
        REQUIRE(u < 4.0);
    }
}

TEST_CASE("normal has unit moments") {
    RngStream rng(2024);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        REQUIRE(std::isfinite(z));
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.0).epsilon(1.0));
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform_index covers its range") {
    RngStream rng(8);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const std::size_t k = rng.uniform_index(7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (int c : counts) CHECK(c > 700);
}
