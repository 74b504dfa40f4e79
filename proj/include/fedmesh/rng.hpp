#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace fedmesh::sim {

/// FNV-1a 64-bit.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random stream keyed by (seed, label). Only the engine
/// (mt19937_64) is taken from the standard library; the distributions are
/// written out here so draws are identical across standard libraries.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string label)
        : seed_(seed), label_(std::move(label)), gen_(splitmix64(seed ^ fnv1a(label_))) {}

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }

    std::uint64_t next_u64() { return gen_(); }

    /// [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

    /// Draw in [lo, hi); exactly lo when lo == hi. Throws InvalidArgument if lo > hi.
    double uniform(double lo, double hi);

    /// Integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool coin(double p_true = 0.5) { return next_unit() < p_true; }

private:
    std::uint64_t seed_;
    std::string label_;
    std::mt19937_64 gen_;
};

}  // namespace fedmesh::sim
