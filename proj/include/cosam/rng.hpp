#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cosam {

// SplitMix64 (Steele, Lea & Flood; the java.util.SplittableRandom finalizer).
// Counter-based: the state advances by a fixed odd constant and every output
// is a strong mix of the counter, so independent streams can be derived by
// hashing a master seed with stream coordinates. Used everywhere randomness
// is needed so runs are reproducible from a single seed.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n) via Lemire's multiply-shift with rejection.
    std::uint64_t next_below(std::uint64_t n) {
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Standard normal via Box-Muller (no spare caching).
    double next_gaussian() {
        double u1 = next_double();
        while (u1 <= 0.0)
            u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::uint64_t state_;
};

// One SplitMix64 scramble round, used as the stream-derivation hash.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 12) + (h >> 4)));
}

// Deterministic substream of a master seed, keyed by up to three coordinates
// (e.g. phase, epoch, user). Streams with distinct keys are independent for
// practical purposes; the same key always yields the same stream.
inline SplitMix64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed);
    h = hash_combine(h, a);
    h = hash_combine(h, b);
    h = hash_combine(h, c);
    return SplitMix64(h);
}

// Phase tags keeping unrelated consumers of the master seed decorrelated.
enum RngPhase : std::uint64_t {
    kRngSplit = 1,
    kRngShuffle = 2,
    kRngSample = 3,
    kRngInitEmbeddings = 4,
    kRngProbe = 5,
    kRngSynth = 6,
    kRngEval = 7,
};

} // namespace cosam
