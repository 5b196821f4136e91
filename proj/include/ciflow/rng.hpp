#pragma once
// Deterministic random numbers for tests and sampling.  Distributions are
// built from raw 64-bit output so results do not depend on the standard
// library implementation.

#include <cmath>
#include <cstdint>

namespace ciflow {

class Rng {
  public:
    explicit Rng(uint64_t seed = 0x9E3779B97F4A7C15ull) : state_(seed) {
        next();  // decouple from the raw seed
    }

    uint64_t next() {  // splitmix64
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (no cached spare, to keep call sites
    // order-independent).
    double normal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    int64_t below(int64_t n) { return int64_t(next() % uint64_t(n)); }

  private:
    uint64_t state_;
};

}  // namespace ciflow
