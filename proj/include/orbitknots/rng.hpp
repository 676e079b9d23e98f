#pragma once

#include <cstdint>
#include <cmath>

namespace orbitknots {

// Counter-based random streams: value(i) is a pure function of
// (seed, stream, i), so parallel consumers drawing disjoint counter ranges
// produce identical output regardless of thread scheduling.
//
// Mixing is SplitMix64 applied to a combined key; statistical quality is
// more than enough for Monte Carlo sampling at the sample counts used here.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ull))) {}

    // 64 uniform bits for counter i.
    std::uint64_t bits(std::uint64_t i) const { return mix(key_ + i * 0xbf58476d1ce4e5b9ull); }

    // Uniform double in [0, 1).
    double uniform(std::uint64_t i) const {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    // Uniform double in [a, b).
    double uniform(std::uint64_t i, double a, double b) const {
        return a + (b - a) * uniform(i);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
};

// Named sub-streams: every module draws from its own stream of the global
// run seed, so re-running a single component reproduces its randomness.
enum class RngStream : std::uint64_t {
    knot_perturbation = 1,
    projection_directions = 2,
    monte_carlo = 3,
    cache_audit = 4,
    experiment = 5,
};

inline CounterRng make_stream(std::uint64_t seed, RngStream s) {
    return CounterRng(seed, static_cast<std::uint64_t>(s));
}

}  // namespace orbitknots
