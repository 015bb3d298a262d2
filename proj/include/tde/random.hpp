#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace tde {

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so trial t of a Monte Carlo run sees the same numbers
// regardless of how many trials run or which thread executes it.

constexpr std::uint64_t mix64(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (char c: name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t value) {
    return mix64(key ^ mix64(value));
}

/// Named substream of a top-level seed ("stimulus", "network", ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    return combine(seed, hash_name(name));
}

class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t key): key_(key) {}

    constexpr CounterRng substream(std::uint64_t index) const {
        return CounterRng(combine(key_, index));
    }
    CounterRng substream(std::string_view name) const {
        return CounterRng(combine(key_, hash_name(name)));
    }

    constexpr std::uint64_t bits(std::uint64_t counter) const {
        return mix64(key_ ^ mix64(counter + 0x632be59bd9b4e019ULL));
    }

    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes counters 2c and 2c+1.
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

/// Sequential cursor over a CounterRng, for code that draws in a fixed order.
class RngCursor {
public:
    explicit RngCursor(CounterRng rng): rng_(rng) {}

    double uniform() { return rng_.uniform(next_++); }
    double normal() { return rng_.normal(next_++); }
    // Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

} // namespace tde
