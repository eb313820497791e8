#ifndef AUGMAE_RNG_HPP
#define AUGMAE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace augmae {

/// splitmix64 mix; used both as an RNG step and to derive independent
/// substream seeds from (seed, salt) so checkpoint/resume replays the
/// same noise without serializing generator state.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t salt_a, uint64_t salt_b = 0) {
    return mix64(mix64(seed ^ mix64(salt_a)) ^ mix64(salt_b ^ 0x5851f42d4c957f2dULL));
}

/// Self-contained xoshiro-free PRNG (splitmix64 stream). All sampling is
/// implemented here rather than with <random> distributions so results are
/// bit-identical regardless of standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1); never returns an exact endpoint.
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform_open();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Gumbel(0, 1).
    double gumbel() { return -std::log(-std::log(uniform_open())); }

    bool bernoulli(double p) { return uniform() < p; }

private:
    uint64_t state_;
};

}  // namespace augmae

#endif
