#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gigdeploy::num {

// SplitMix64 step; used to derive well-separated engine seeds from a
// (seed, stream) pair so replications get independent, reproducible streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic random stream: identical output for identical (seed, stream)
// on every platform. Variates are hand-rolled from raw engine words rather
// than pulled from std distributions, whose outputs are not portable.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        (void)splitmix64(s);
        s ^= 0x9E3779B97F4A7C15ULL * (stream + 1);
        const std::uint64_t s0 = splitmix64(s);
        const std::uint64_t s1 = splitmix64(s);
        eng_.seed(s0 ^ (s1 << 1));
    }

    // uniform on [0, 1) with 53-bit resolution
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    // uniform on [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // exponential with the given rate; log1p form never evaluates log(0)
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::uint64_t next_word() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

} // namespace gigdeploy::num
