#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace memcentric {

// Deterministic random stream.  The engine is std::mt19937_64; the value
// transforms are written out here because the std:: distributions are
// implementation-defined and would break byte-identical replay across
// standard libraries.
class Rng {
  public:
    Rng() : Rng(0, 0) {}
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(mix(seed, stream)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }

    // Uniform integer on [0, n); n > 0.  Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; one variate per call, no cached state.
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    friend bool operator==(const Rng&, const Rng&) = default;

  private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        // splitmix64 finalizer over (seed, stream)
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

// Stream ids used by the device; user streams start at kUserStreamBase.
enum class StreamId : std::uint64_t {
    disturbance = 1,
    mitigation = 2,
    pud = 3,
    trng = 4,
    workload = 5,
};
inline constexpr std::uint64_t kUserStreamBase = 100;

inline Rng make_stream(std::uint64_t seed, StreamId id) {
    return Rng(seed, static_cast<std::uint64_t>(id));
}

} // namespace memcentric
