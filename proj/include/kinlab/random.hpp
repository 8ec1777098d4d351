#pragma once

// Counter-based randomness. Every draw is a pure function of (key, counter), so
// values do not depend on iteration order or on how work is split across threads.

#include <cstdint>
#include <random>

namespace kinlab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter) {
    return mix64(mix64(key) ^ mix64(counter * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

/// Derive an independent key for a named sub-stream.
constexpr std::uint64_t substream(std::uint64_t key, std::uint64_t tag) {
    return counter_hash(key ^ 0xa0761d6478bd642fULL, tag);
}

/// Uniform in the open interval (0, 1) from the top 52 bits; the extremes are
/// 2^-53 and 1 - 2^-53, both exactly representable.
constexpr double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
    return to_open_unit(counter_hash(key, counter));
}

/// Inverse standard-normal CDF, Acklam's rational approximation
/// (relative error below 1.15e-9 over (0, 1)). Only sqrt/log are used, so
/// outputs are stable across IEEE-754 platforms with a correctly rounded log.
double normal_quantile(double u);

/// Sequential stream for Monte-Carlo paths: std::mt19937_64 seeded from a
/// counter hash; uniforms and exponentials are derived from raw bits, not from
/// std:: distributions, so results are identical across standard libraries.
class PathRng {
public:
    PathRng(std::uint64_t key, std::uint64_t counter) : engine_(counter_hash(key, counter)) {}
    double uniform() { return to_open_unit(engine_()); }
    double exponential(double rate);
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace kinlab
