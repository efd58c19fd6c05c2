#pragma once

// Seeded random helpers. std::mt19937_64's output sequence is fixed by the
// standard, but the std distributions are implementation-defined, so the
// draws below are spelled out to keep runs bit-identical across toolchains.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace dmcga {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to turn (master seed, stage offset) pairs into
/// well-mixed stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

/// Uniform integer in [0, n). n must be > 0. Rejection sampling, no modulo bias.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // 2^64 mod bound; values below it would over-represent small residues.
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t x = rng();
    while (x < threshold) x = rng();
    return static_cast<std::size_t>(x % bound);
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Fisher-Yates shuffle driven by uniform_index.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

/// k distinct elements of `pool`, drawn uniformly without replacement
/// (partial Fisher-Yates on a copy).
template <class T>
std::vector<T> sample_without_replacement(std::span<const T> pool, std::size_t k, Rng& rng) {
    std::vector<T> work(pool.begin(), pool.end());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, work.size() - i);
        std::swap(work[i], work[j]);
    }
    work.resize(k);
    return work;
}

}  // namespace dmcga
