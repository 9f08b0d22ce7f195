#ifndef BOHMFLUX_RNG_HPP
#define BOHMFLUX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace bohmflux {

// Reproducibility contract: every random number in a run derives from the
// scenario seed via per-trajectory substreams keyed by (seed, index).
// We avoid std::uniform_real_distribution / std::normal_distribution because
// their output sequences are implementation-defined; mt19937_64 itself is
// bit-exact across platforms.

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Inverse of the standard normal CDF (Acklam's rational approximation
/// polished with two Halley steps against std::erfc), |error| < 1e-15.
double inverse_normal_cdf(double p);

class StreamRng {
public:
    StreamRng(uint64_t seed, uint64_t stream_index) {
        uint64_t s = seed ^ (0xA0761D6478BD642Full * (stream_index + 1));
        // decorrelate nearby stream indices before seeding the engine
        uint64_t st = s;
        std::seed_seq seq{splitmix64(st), splitmix64(st), splitmix64(st), splitmix64(st)};
        engine_.seed(seq);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1), safe as inverse-CDF input.
    double uniform_open() {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return u;
    }

    double normal() { return inverse_normal_cdf(uniform_open()); }

    uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}

#endif
