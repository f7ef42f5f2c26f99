#pragma once

#include <cstdint>

namespace safempd {

/// Deterministic splitmix64-based stream. Child streams are derived by pure
/// hashing of a path of integers, so streams with distinct paths are
/// reproducible and statistically independent regardless of draw order
/// elsewhere.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    /// Derive an independent child stream; derivation does not advance this
    /// stream's state.
    RngStream at(std::uint64_t a) const;
    RngStream at(std::uint64_t a, std::uint64_t b) const;

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform01();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller; draws are cached pairwise.
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace safempd
