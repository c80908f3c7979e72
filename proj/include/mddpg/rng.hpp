#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mddpg {

// RNG stream tags. Every random draw in a run comes from a stream derived
// from the master seed and one of these tags, so each component can be
// reseeded or replayed independently.
enum class Stream : std::uint64_t {
    World = 1,       // obstacle speeds and dwell times
    Noise = 2,       // exploration noise
    Replay = 3,      // minibatch sampling
    Init = 4,        // network initialization
    Eval = 5,        // greedy evaluation episodes
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic substream seed from (master, stream, index).
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::uint64_t index = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s = h ^ static_cast<std::uint64_t>(stream);
    h = splitmix64(s);
    s = h ^ index;
    return splitmix64(s);
}

// mt19937_64 with hand-rolled distributions. The standard distribution
// objects are implementation-defined; these are pinned so seeded runs are
// reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + next_double() * (hi - lo);
    }

    // Uniform integer in [lo, hi], inclusive.
    long uniform_int(long lo, long hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(engine_() % span);
    }

    // Standard normal via Box-Muller (two fresh uniforms per draw).
    double gaussian() {
        double u1 = 1.0 - next_double(); // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    bool operator==(const Rng& o) const { return engine_ == o.engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace mddpg
