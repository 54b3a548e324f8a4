#pragma once

#include <cstdint>

namespace tailbound {

// 64-bit finalizer (the splitmix64 output scrambler); used for substream
// derivation so that per-trial streams are decorrelated from the raw index.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// splitmix64: the project's pinned pseudo-random generator. Small state,
// cheap jumps, and good statistical quality for Monte Carlo tail counting.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in the open interval (0, 1): midpoints (k + 1/2) / 2^53.
    double next_open() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Seed plus the substream derivation contract. Stream `index` starts from
// state mix64(seed ^ mix64(index)), so a trial's draws depend only on
// (seed, trial index) and never on how trials are split across workers.
struct SeedSpec {
    std::uint64_t seed = 42;

    SplitMix64 substream(std::uint64_t index) const {
        return SplitMix64(mix64(seed ^ mix64(index)));
    }
};

} // namespace tailbound
