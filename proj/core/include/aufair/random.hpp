#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace aufair {

// boost distributions produce the same stream on every platform, unlike the
// implementation-defined std:: ones, so seeded runs are portable.
using Rng = boost::random::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
    return boost::random::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_unit(Rng& rng) {
    return boost::random::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return boost::random::bernoulli_distribution<double>(p)(rng);
}

// Draw k distinct values from {0..n-1} (partial Fisher-Yates). Order of the
// result is the draw order.
inline std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> items(n);
    for (std::size_t i = 0; i < n; ++i) items[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = uniform_between(rng, i, n - 1);
        std::swap(items[i], items[j]);
    }
    items.resize(k);
    return items;
}

// Stable child seed for a (parent, stream) pair; splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
    std::uint64_t z = parent + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace aufair
