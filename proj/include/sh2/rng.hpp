#pragma once

#include <cstdint>
#include <random>

namespace sh2 {

// splitmix64 step, used to derive independent stream seeds from a base seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream));
}

// Seeded random stream. Parallel consumers (workers, trials) each own a
// stream derived from (seed, stream index) so state is never shared.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(derive_seed(seed, stream)) {}

    // Uniform in [0, 1). 53-bit resolution, bit-reproducible across platforms.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Random sign with equal probability.
    double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace sh2
