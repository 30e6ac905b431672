// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "metastack/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace metastack
{

// SplitMix64 finalizer. Used to derive independent stream seeds from a master seed
// and a list of counters, so every trial and operating point owns its own generator.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters)
{
    std::uint64_t s = mix_seed(master);
    for (auto c : counters)
        s = mix_seed(s ^ mix_seed(c + 0x632BE59BD9B4E019ULL));
    return s;
}

class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return normal_(engine_); }
    std::uint32_t bit() { return static_cast<std::uint32_t>(engine_() >> 63); }

    // Circularly symmetric CN(0, variance): real and imaginary parts N(0, variance / 2).
    Complex complex_normal(double variance = 1.0)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0)
    {
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                m(i, j) = complex_normal(variance);
        return m;
    }

    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace metastack
