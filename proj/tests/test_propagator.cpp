#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geophase/propagator.hpp"
#include "support.hpp"

using namespace geophase;

TEST_CASE("potential propagator equals the matrix exponential") {
    const ModelParams p;
    const double dt = 0.1;
    const auto h = electronic_hamiltonian(p, {1.0, 0.0});
    const auto u = potential_propagator(h, dt);
    // -i dt (A 1 + B.sigma)
    const cplx mi(0.0, -dt);
    const test_support::M2 gen{mi * (h.A + h.B.z), mi * cplx(h.B.x, -h.B.y),
                               mi * cplx(h.B.x, h.B.y), mi * (h.A - h.B.z)};
    const auto ref = test_support::expm(gen);
    for (int q = 0; q < 4; ++q) CHECK(std::abs(u[q] - ref[q]) < 1e-12);

    const auto v = potential_propagator(electronic_hamiltonian(p, {-2.3, 4.1}), 0.25);
    const test_support::M2 vd{std::conj(v[0]), std::conj(v[2]), std::conj(v[1]), std::conj(v[3])};
    const auto id = test_support::mul(vd, v);
    CHECK(std::abs(id[0] - 1.0) < 1e-14);
    CHECK(std::abs(id[1]) < 1e-14);
    CHECK(std::abs(id[3] - 1.0) < 1e-14);
}

TEST_CASE("scalar potential only multiplies by its phase") {
    ElectronicHamiltonianSample h;
    h.A = std::numbers::pi / 0.5;
    const auto u = potential_propagator(h, 0.5);
    CHECK(std::abs(u[0] + 1.0) < 1e-14);
    CHECK(std::abs(u[3] + 1.0) < 1e-14);
    CHECK(std::abs(u[1]) == 0.0);
}

namespace {

// Complex free Gaussian of density width sigma0 centered at the origin.
SpinorField free_gaussian(const Grid2D& g, double sigma0) {
    SpinorField s(g);
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const double r2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
            s.psi1[g.index(i, j)] = std::exp(-r2 / (4 * sigma0 * sigma0));
        }
    normalize(s);
    return s;
}

double second_moment_x(const SpinorField& s) {
    const auto& g = s.grid;
    double m = 0.0;
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const std::size_t k = g.index(i, j);
            m += g.x(i) * g.x(i) * (std::norm(s.psi1[k]) + std::norm(s.psi2[k]));
        }
    return m * g.cell_area();
}

}  // namespace

TEST_CASE("kinetic step spreads a free Gaussian as in closed form") {
    const auto g = Grid2D::square(256, 20.0);
    SpectralOps ops(g);
    const double mass = 1.0, sigma0 = 0.5, t = 1.0;
    auto s = free_gaussian(g, sigma0);
    for (int k = 0; k < 4; ++k) kinetic_step(ops, mass, s, t / 4);
    const double tau = units::hbar * t / (2 * mass * sigma0 * sigma0);
    const double sigma_t = sigma0 * std::sqrt(1 + tau * tau);
    CHECK(std::sqrt(second_moment_x(s)) == doctest::Approx(sigma_t).epsilon(1e-8));
    CHECK(norm_squared(s) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("plane wave picks up exactly -hbar k^2 dt / 2M") {
    const auto g = Grid2D::square(32, 8.0);
    SpectralOps ops(g);
    const double kx = g.kx()[3], ky = g.ky()[30];
    SpinorField s(g);
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_y(); ++j)
            s.psi2[g.index(i, j)] = std::polar(1.0, kx * g.x(i) + ky * g.y(j));
    const auto before = s.psi2;
    const double mass = 3.0, dt = 0.7;
    kinetic_step(ops, mass, s, dt);
    const cplx expected = std::polar(1.0, -(kx * kx + ky * ky) * dt / (2 * mass));
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(s.psi2[k] - expected * before[k]));
    CHECK(err < 1e-12);
}

TEST_CASE("Strang propagation is unitary and time reversible") {
    const ModelParams p;
    const auto g = Grid2D::square(128, 20.0);
    const auto psi0 = initial_state(p, g);
    SplitOperator fwd(p, g, 0.25);
    SplitOperator bwd(p, g, -0.25);
    auto psi = psi0;
    fwd.advance(psi, 40);  // 10 a.u.
    CHECK(norm_squared(psi) == doctest::Approx(1.0).epsilon(1e-11));
    bwd.advance(psi, 40);
    CHECK(distance(psi, psi0) < 1e-10);
}

TEST_CASE("merged advance matches single steps") {
    const ModelParams p;
    const auto g = Grid2D::square(64, 20.0);
    SplitOperator op(p, g, 0.25);
    auto a = initial_state(p, g);
    auto b = a;
    for (int k = 0; k < 7; ++k) op.step(a);
    op.advance(b, 7);
    CHECK(distance(a, b) < 1e-12);
}

TEST_CASE("energy of the correlated initial state matches quadrature") {
    const ModelParams p;
    const auto g = Grid2D::square(256, 20.0);
    SpectralOps ops(g);
    const auto psi = initial_state(p, g);
    const auto obs = observables(ops, p, psi);

    // Psi = g(x) chi(x) with real g and |grad chi|^2 = |grad beta|^2 / 2 = 1 / (2 rho^2).
    const Point2 c = initial_center(p), w = initial_width(p);
    double norm = 0.0, e = 0.0;
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const Point2 x = g.point(i, j);
            const double rho2 = x.x * x.x + x.y * x.y;
            if (rho2 == 0.0) continue;
            const double ax = (x.x - c.x) / w.x, ay = (x.y - c.y) / w.y;
            const double amp = std::exp(-0.25 * (ax * ax + ay * ay));
            const double gx = -0.5 * ax / w.x * amp, gy = -0.5 * ay / w.y * amp;
            const auto h = electronic_hamiltonian(p, x);
            const double grad2 = gx * gx + gy * gy + amp * amp / (2 * rho2);
            e += amp * amp * (h.A - geophase::norm(h.B)) + grad2 / (2 * p.mass());
            norm += amp * amp;
        }
    CHECK(obs.norm == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(obs.energy == doctest::Approx(e / norm).epsilon(1e-8));
    CHECK(obs.kinetic + obs.potential == doctest::Approx(obs.energy).epsilon(1e-14));
}

TEST_CASE("pure upper component sees only the scalar potential") {
    const ModelParams p;
    const auto g = Grid2D::square(64, 20.0);
    SpectralOps ops(g);
    auto psi = initial_state(p, g);
    double a = 0.0;
    for (std::size_t i = 0; i < g.n_x(); ++i)
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const std::size_t k = g.index(i, j);
            psi.psi1[k] = std::abs(psi.psi1[k]) * std::sqrt(2.0);
            psi.psi2[k] = 0.0;
            a += std::norm(psi.psi1[k]) * electronic_hamiltonian(p, g.point(i, j)).A;
        }
    a *= g.cell_area() / norm_squared(psi);
    CHECK(observables(ops, p, psi).potential == doctest::Approx(a).epsilon(1e-13));
}

TEST_CASE("time step validation rejects unresolved precession") {
    const ModelParams p;
    const auto g = Grid2D::square(64, 20.0);
    PropagatorConfig cfg;
    cfg.dt = 0.25;
    CHECK_NOTHROW(cfg.validate(p, g));
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(p, g), std::invalid_argument);
    cfg.dt = 10.0;  // 10 * 0.1 * 10 sqrt2 > pi/4
    CHECK_THROWS_AS(cfg.validate(p, g), std::invalid_argument);
}

TEST_CASE("edge density monitor") {
    const auto g = Grid2D::square(32, 8.0);
    SpinorField s(g);
    CHECK(edge_density(s) == 0.0);
    s.psi2[g.index(0, 7)] = cplx(0.0, 2.0);
    s.psi1[g.index(5, 5)] = 10.0;
    CHECK(edge_density(s) == doctest::Approx(4.0));
}
