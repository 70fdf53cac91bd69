#pragma once

#include <cmath>
#include <cstdint>

namespace decbandit {

// One splitmix64 step. Also used to mix key material into stream seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class StreamPurpose : std::uint64_t {
    ArmRewards = 1,
    Tiebreak = 2,
    Graph = 3,
};

// Deterministic counter-keyed random stream. Streams are derived from the
// tuple (master seed, run index, agent id, purpose, index); the index slot
// carries the arm id for reward streams so that the j-th draw for a given
// (run, agent, arm) is identical no matter how pulls interleave across arms.
class RandomStream {
public:
    RandomStream() = default;
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t derive_key(std::uint64_t master, std::uint64_t run, std::uint64_t agent,
                                    StreamPurpose purpose, std::uint64_t index = 0) {
        std::uint64_t h = master;
        for (std::uint64_t v : {run, agent, static_cast<std::uint64_t>(purpose), index}) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
            std::uint64_t s = h;
            h = splitmix64_next(s);
        }
        return h;
    }

    static RandomStream keyed(std::uint64_t master, std::uint64_t run, std::uint64_t agent,
                              StreamPurpose purpose, std::uint64_t index = 0) {
        return RandomStream(derive_key(master, run, agent, purpose, index));
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, bound).
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t reject_below = (-bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= reject_below) return r % bound;
        }
    }

    // Box-Muller, cosine branch only so each call consumes exactly two draws.
    double normal(double mean, double stddev) {
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
        return mean + stddev * z;
    }

    // Marsaglia-Tsang gamma with unit scale.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = 1.0 - uniform01();  // keep away from 0
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal(0.0, 1.0);
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = 1.0 - uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

private:
    std::uint64_t state_ = 0x853c49e6748fea9bULL;
};

}  // namespace decbandit
