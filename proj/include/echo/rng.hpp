#pragma once

#include <cstdint>
#include <vector>

// Deterministic random primitives used everywhere randomness is needed, so
// that identical seeds give identical results on every platform and build.

namespace echo::rng {

/// splitmix64: tiny, fast, and statistically solid for simulation use.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) without modulo bias (Lemire rejection).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        while (true) {
            const std::uint64_t value = next();
            const std::uint64_t threshold = (0ULL - bound) % bound;
            if (value >= threshold) return value % bound;
        }
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Independent child seed for stream `stream` of a run seeded with `seed`.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    return g.next();
}

/// Fisher-Yates shuffle driven by SplitMix64, identical on every platform.
template <typename T>
void shuffle(std::vector<T>& values, SplitMix64& gen) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace echo::rng
