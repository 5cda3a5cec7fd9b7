#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace subnewton {

/// Purpose tags keep independent draws of one iteration on separate streams.
enum class StreamPurpose : std::uint64_t {
    gradient_sample = 1,
    hessian_sample = 2,
    shuffle = 3,
    split = 4,
    power_iteration = 5,
};

/// One splitmix64 step; used only to derive well-separated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Engine for the stream keyed by (seed, counter, purpose). The mt19937_64
/// output sequence is fixed by the standard, so streams agree across platforms.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t counter, StreamPurpose purpose) {
    std::uint64_t key = splitmix64(seed);
    key = splitmix64(key ^ counter);
    key = splitmix64(key ^ static_cast<std::uint64_t>(purpose));
    return std::mt19937_64(key);
}

/// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = gen();
    } while (r >= limit);
    return r % bound;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

/// Fisher-Yates shuffle with the portable bounded draw.
template <typename T>
void shuffle(std::span<T> values, std::mt19937_64& gen) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(gen, i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace subnewton
