// Shared helpers for the unit tests: independent oracles and scratch directories.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <string>

#include "geophase/grid.hpp"

namespace test_support {

using geophase::cplx;
using M2 = std::array<cplx, 4>;

inline M2 mul(const M2& a, const M2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// exp(m) by scaling and squaring with a 20-term Taylor series.
inline M2 expm(M2 m) {
    double nrm = 0.0;
    for (const auto& z : m) nrm = std::max(nrm, std::abs(z));
    int squarings = 0;
    while (nrm > 0.125) {
        nrm *= 0.5;
        ++squarings;
    }
    const double scale = std::ldexp(1.0, -squarings);
    for (auto& z : m) z *= scale;
    M2 term{1.0, 0.0, 0.0, 1.0};
    M2 sum = term;
    for (int k = 1; k <= 20; ++k) {
        term = mul(term, m);
        for (auto& z : term) z /= static_cast<double>(k);
        for (int q = 0; q < 4; ++q) sum[q] += term[q];
    }
    for (int s = 0; s < squarings; ++s) sum = mul(sum, sum);
    return sum;
}

inline std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::path(GEOPHASE_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_support
