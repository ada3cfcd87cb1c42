#include "geophase/grid.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace geophase {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::vector<double> fft_wavenumbers(std::size_t n, double length) {
    std::vector<double> k(n);
    const double dk = 2.0 * std::numbers::pi / length;
    const auto half = static_cast<long>(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const long m = static_cast<long>(i) < half ? static_cast<long>(i)
                                                   : static_cast<long>(i) - static_cast<long>(n);
        k[i] = dk * static_cast<double>(m);
    }
    return k;
}

}  // namespace

Grid2D::Grid2D(std::size_t n_x, std::size_t n_y, double length_x, double length_y)
    : n_x_(n_x), n_y_(n_y), length_x_(length_x), length_y_(length_y) {
    if (!is_power_of_two(n_x) || !is_power_of_two(n_y)) {
        throw std::invalid_argument("grid sizes must be powers of two >= 2, got " +
                                    std::to_string(n_x) + "x" + std::to_string(n_y));
    }
    if (!(length_x > 0.0) || !(length_y > 0.0)) {
        throw std::invalid_argument("grid lengths must be positive");
    }
    dx_ = length_x / static_cast<double>(n_x);
    dy_ = length_y / static_cast<double>(n_y);
    kx_ = fft_wavenumbers(n_x, length_x);
    ky_ = fft_wavenumbers(n_y, length_y);
}

double norm_squared(const SpinorField& state) {
    double acc = 0.0;
    for (std::size_t k = 0; k < state.psi1.size(); ++k) {
        acc += std::norm(state.psi1[k]) + std::norm(state.psi2[k]);
    }
    return acc * state.grid.cell_area();
}

void normalize(SpinorField& state) {
    const double n2 = norm_squared(state);
    if (!(n2 > 0.0)) throw std::invalid_argument("cannot normalize a zero state");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& v : state.psi1) v *= scale;
    for (auto& v : state.psi2) v *= scale;
}

double distance(const SpinorField& a, const SpinorField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("distance: grids differ");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.psi1.size(); ++k) {
        acc += std::norm(a.psi1[k] - b.psi1[k]) + std::norm(a.psi2[k] - b.psi2[k]);
    }
    return std::sqrt(acc * a.grid.cell_area());
}

}  // namespace geophase
