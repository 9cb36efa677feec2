#pragma once

#include <cstdint>
#include <vector>

namespace es {

using real = long double;
using vec = std::vector<real>;

// Counter-based splittable generator built on splitmix64. Substreams are
// derived from (seed, index) so that batch/replicate layouts are reproducible
// independent of thread count.
struct Rng {
    std::uint64_t state;
    bool has_spare = false;
    double spare = 0.0;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]: 53-bit mantissa, never 0 so log() is safe.
    double uniform01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (1.0 - uniform01());
    }

    // Standard normal via Box-Muller with cached spare.
    double normal();

    void normal_fill(vec& z) {
        for (auto& zi : z) zi = normal();
    }

    // Child stream `index` of master seed `seed`; used for replicates and
    // Monte Carlo batches. Distinct indices give decorrelated streams.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix(seed + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }
};

}  // namespace es
