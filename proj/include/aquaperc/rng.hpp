#pragma once

#include <cmath>
#include <cstdint>

namespace aquaperc {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Mixes a base seed with up to three stream indices. Used to derive
// independent, reproducible RNG streams per pixel / sample / subtask.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t h = splitmix64(seed ^ 0xa0761d6478bd642fULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return splitmix64(h ^ c);
}

// PCG32 (O'Neill). Hand-rolled so that sequences are identical across
// platforms and standard-library versions.
class Pcg32 {
public:
    explicit Pcg32(uint64_t seed = 0x853c49e6748fea9bULL, uint64_t seq = 0xda3e39cb94b95bdbULL) {
        state_ = 0;
        inc_ = (seq << 1) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    uint32_t next_u32() {
        uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        uint32_t xorshifted = static_cast<uint32_t>(((old >> 18) ^ old) >> 27);
        uint32_t rot = static_cast<uint32_t>(old >> 59);
        return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31));
    }

    // Uniform double in [0, 1).
    double uniform() { return next_u32() * (1.0 / 4294967296.0); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        u1 = u1 > 1e-300 ? u1 : 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Poisson variate. Knuth multiplication in chunks of lambda <= 64
    // (exact); the chunking keeps exp(-lambda) away from underflow.
    uint64_t poisson(double lambda) {
        if (!(lambda > 0.0)) return 0;
        uint64_t total = 0;
        while (lambda > 64.0) {
            total += poisson_knuth(64.0);
            lambda -= 64.0;
        }
        return total + poisson_knuth(lambda);
    }

private:
    uint64_t poisson_knuth(double lambda) {
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        uint64_t k = 0;
        do {
            prod *= uniform();
            ++k;
        } while (prod > limit);
        return k - 1;
    }

    uint64_t state_;
    uint64_t inc_;
};

}  // namespace aquaperc
