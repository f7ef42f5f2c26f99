#include "safempd/rng.hpp"

#include <cmath>

namespace safempd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31u);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6u) + (a >> 2u));
    return splitmix64(s);
}

} // namespace

RngStream::RngStream(std::uint64_t seed) : state_(seed) {}

RngStream RngStream::at(std::uint64_t a) const {
    return RngStream(mix(state_, a));
}

RngStream RngStream::at(std::uint64_t a, std::uint64_t b) const {
    return RngStream(mix(mix(state_, a), b));
}

std::uint64_t RngStream::next_u64() {
    return splitmix64(state_);
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = kTwoPi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    return next_u64() % n;
}

} // namespace safempd
