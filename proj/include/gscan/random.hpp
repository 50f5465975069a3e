/**
 * @file random.hpp
 * @brief Portable draws on top of std::mt19937_64.
 *
 * The engine's output sequence is fixed by the standard but the
 * distributions are not, so anything that feeds a digest uses these.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gscan {

/// Uniform integer in [0, n) by rejection. n must be > 0.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n)
{
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit)
        x = rng();
    return x % n;
}

/// Uniform double in [0, 1).
inline double uniform_unit(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& rng, double p)
{
    return uniform_unit(rng) < p;
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng)
{
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[uniform_index(rng, i)]);
}

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng)
{
    return items[uniform_index(rng, items.size())];
}

} // namespace gscan
