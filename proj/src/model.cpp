#include "geophase/model.hpp"

#include <cfloat>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geophase {

void ModelParams::validate() const {
    if (!(mass_amu > 0.0)) throw std::invalid_argument("mass_amu must be positive");
    if (!(omega_x > 0.0) || !(omega_y > 0.0)) {
        throw std::invalid_argument("omega_x and omega_y must be positive");
    }
}

ElectronicHamiltonianSample electronic_hamiltonian(const ModelParams& p, Point2 x) {
    const double m = p.mass();
    ElectronicHamiltonianSample h;
    h.A = 0.5 * m * (p.omega_x * p.omega_x * x.x * x.x + p.omega_y * p.omega_y * x.y * x.y);
    h.B = {p.kappa_x * x.x, p.kappa_y * x.y, 0.0};
    return h;
}

AdiabaticEnergies adiabatic_surfaces(const ModelParams& p, Point2 x) {
    const auto h = electronic_hamiltonian(p, x);
    const double b = norm(h.B);
    return {h.A - b, h.A + b};
}

double field_azimuth(const ModelParams& p, Point2 x) {
    const double bx = p.kappa_x * x.x;
    const double by = p.kappa_y * x.y;
    if (bx == 0.0 && by == 0.0) return 0.0;
    return std::atan2(by, bx);
}

namespace {

bool second_component_real(Gauge g) { return g != Gauge::NorthernPlus; }

}  // namespace

AdiabaticSpinor adiabatic_spinor(const ModelParams& p, Point2 x, Branch branch, Gauge gauge) {
    AdiabaticSpinor out;
    out.on_seam = (p.kappa_x * x.x == 0.0 && p.kappa_y * x.y == 0.0);
    const double beta = field_azimuth(p, x);
    const double sign = branch == Branch::Plus ? 1.0 : -1.0;
    const double r = 1.0 / std::numbers::sqrt2;
    if (second_component_real(gauge)) {
        out.u = {sign * r * std::polar(1.0, -beta), cplx{r, 0.0}};
    } else {
        out.u = {cplx{r, 0.0}, sign * r * std::polar(1.0, beta)};
    }
    return out;
}

Point2 analytic_connection(const ModelParams& p, Point2 x, Gauge gauge) {
    const double bx = p.kappa_x * x.x;
    const double by = p.kappa_y * x.y;
    const double b2 = bx * bx + by * by;
    if (b2 == 0.0) return {};
    // grad beta for beta = atan2(kappa_y y, kappa_x x)
    const double f = p.kappa_x * p.kappa_y / b2;
    const Point2 grad_beta{-f * x.y, f * x.x};
    const double half = second_component_real(gauge) ? 0.5 : -0.5;
    return half * grad_beta;
}

Point2 initial_center(const ModelParams& p) {
    return {-2.0 * p.kappa_x / (p.mass() * p.omega_x * p.omega_x), 0.0};
}

Point2 initial_width(const ModelParams& p) {
    return {std::sqrt(units::hbar / (2.0 * p.mass() * p.omega_x)),
            std::sqrt(units::hbar / (2.0 * p.mass() * p.omega_y))};
}

namespace {

double gaussian_amplitude(Point2 x, Point2 c, Point2 w) {
    const double ax = (x.x - c.x) / w.x;
    const double ay = (x.y - c.y) / w.y;
    return std::exp(-0.25 * (ax * ax + ay * ay));
}

std::array<cplx, 2> initial_spinor(const ModelParams& p, Point2 x) {
    const Point2 at = p.init_kind == InitKind::Correlated ? x : initial_center(p);
    return adiabatic_spinor(p, at, Branch::Minus, p.gauge).u;
}

}  // namespace

SpinorField initial_state(const ModelParams& p, const Grid2D& grid) {
    p.validate();
    const Point2 c = initial_center(p);
    const Point2 w = initial_width(p);

    // Largest amplitude on the box boundary, relative to the peak value 1.
    const double ex = std::min(std::abs(-0.5 * grid.length_x() - c.x),
                               std::abs(0.5 * grid.length_x() - grid.dx() - c.x));
    const double ey = std::min(std::abs(-0.5 * grid.length_y() - c.y),
                               std::abs(0.5 * grid.length_y() - grid.dy() - c.y));
    const double edge = std::max(std::exp(-0.25 * (ex / w.x) * (ex / w.x)),
                                 std::exp(-0.25 * (ey / w.y) * (ey / w.y)));
    if (edge > DBL_EPSILON) {
        throw std::invalid_argument("initial Gaussian not contained in the box (edge amplitude " +
                                    std::to_string(edge) + ")");
    }

    SpinorField state(grid);
    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            const Point2 x = grid.point(i, j);
            const double amp = gaussian_amplitude(x, c, w);
            const auto chi = initial_spinor(p, x);
            const std::size_t k = grid.index(i, j);
            state.psi1[k] = amp * chi[0];
            state.psi2[k] = amp * chi[1];
        }
    }
    normalize(state);
    return state;
}

InitialFieldSeeds initial_field_seeds(const ModelParams& p, const Grid2D& grid) {
    const Point2 c = initial_center(p);
    const Point2 w = initial_width(p);
    InitialFieldSeeds seeds;
    seeds.s.resize(grid.size());
    seeds.pi_x.assign(grid.size(), 0.0);
    seeds.pi_y.assign(grid.size(), 0.0);
    seeds.w_x.resize(grid.size());
    seeds.w_y.resize(grid.size());
    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            const Point2 x = grid.point(i, j);
            const std::size_t k = grid.index(i, j);
            const auto chi = initial_spinor(p, x);
            const cplx ab = std::conj(chi[0]) * chi[1];
            seeds.s[k] = {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(chi[0]) - std::norm(chi[1])};
            if (p.init_kind == InitKind::Correlated) {
                // Real psi0: pi = -hbar A of the electronic factor.
                const Point2 a = analytic_connection(p, x, p.gauge);
                seeds.pi_x[k] = -units::hbar * a.x;
                seeds.pi_y[k] = -units::hbar * a.y;
            }
            seeds.w_x[k] = 0.5 * units::hbar * (x.x - c.x) / (w.x * w.x);
            seeds.w_y[k] = 0.5 * units::hbar * (x.y - c.y) / (w.y * w.y);
        }
    }
    return seeds;
}

}  // namespace geophase
