#pragma once

#include <cmath>
#include <cstdint>

#include "eit/constants.hpp"

namespace eit {

/// Counter-based random stream: sample i, slot j maps to the same value no
/// matter how the index range is partitioned across threads.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::uint64_t mix64(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t bits(std::uint64_t i, std::uint64_t j) const {
        std::uint64_t h = seed + 0x9e3779b97f4a7c15ULL * (2 * i + 1);
        h = mix64(h) ^ (j * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL);
        return mix64(h);
    }

    /// uniform in (0, 1]
    double uniform(std::uint64_t i, std::uint64_t j) const {
        return 1.0 - static_cast<double>(bits(i, j) >> 11) * 0x1.0p-53;
    }

    /// standard normal pair from slots (2j, 2j+1) via Box-Muller
    void normal_pair(std::uint64_t i, std::uint64_t j, double& z0,
                     double& z1) const {
        const double u1 = uniform(i, 2 * j);
        const double u2 = uniform(i, 2 * j + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        z0 = r * std::cos(constants::two_pi * u2);
        z1 = r * std::sin(constants::two_pi * u2);
    }
};

}  // namespace eit
