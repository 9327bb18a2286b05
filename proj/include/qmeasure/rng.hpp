#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>
#include <utility>

namespace qm {

// Counter-based PRNG (SplitMix64). The state advances by a fixed odd
// increment and every output is a bijective finalizer of the counter, so a
// stream is fully determined by its 64-bit seed and its draw index. Streams
// for different consumers are derived from one master seed by name (see
// derive_stream), which keeps existing streams stable when new consumers
// are added.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Uniform integer in [0, n). n must be positive and small relative to 2^53.
    int uniform_int(int n) {
        return static_cast<int>(uniform01() * static_cast<double>(n));
    }

    // Pair of independent standard normals (Box-Muller).
    std::pair<double, double> normal_pair() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double normal() { return normal_pair().first; }

  private:
    std::uint64_t state_;
};

// FNV-1a over the stream name, mixed with the master seed through the
// SplitMix64 finalizer.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ull;
    }
    std::uint64_t z = master ^ h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline Rng derive_stream(std::uint64_t master, std::string_view name) {
    return Rng(derive_stream_seed(master, name));
}

}  // namespace qm
