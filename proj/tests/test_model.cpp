#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geophase/fields.hpp"
#include "geophase/model.hpp"

using namespace geophase;

TEST_CASE("default model reproduces the molecular parameter set") {
    const ModelParams p;
    CHECK(p.mass() == doctest::Approx(1822.888486));
    CHECK(p.omega_x == doctest::Approx(4.5563359e-3));
    CHECK(p.kappa_x == doctest::Approx(0.1));
    // -2 kappa / (M omega^2) and sqrt(hbar / 2 M omega), evaluated by hand.
    CHECK(initial_center(p).x == doctest::Approx(-5.2848).epsilon(2e-5));
    CHECK(initial_center(p).y == 0.0);
    CHECK(initial_width(p).x == doctest::Approx(0.24536).epsilon(2e-5));
}

TEST_CASE("adiabatic surfaces form a Mexican hat") {
    const ModelParams p;
    const double k = 0.5 * p.mass() * p.omega_x * p.omega_x;
    for (double rho : {0.0, 0.5, 2.0, 5.2848}) {
        for (double phi : {0.0, 1.0, 2.5}) {
            const Point2 x{rho * std::cos(phi), rho * std::sin(phi)};
            const auto e = adiabatic_surfaces(p, x);
            CHECK(e.minus == doctest::Approx(k * rho * rho - 0.1 * rho).epsilon(1e-12));
            CHECK(e.plus == doctest::Approx(k * rho * rho + 0.1 * rho).epsilon(1e-12));
        }
    }
    // The initial center sits at the intersection energy; the valley floor at half its radius.
    const double x0 = initial_center(p).x;
    CHECK(std::abs(adiabatic_surfaces(p, {x0, 0}).minus) < 1e-15);
    const double rho_min = 0.1 / (2.0 * k);
    const double h = 1e-4;
    const double slope = (adiabatic_surfaces(p, {rho_min + h, 0}).minus -
                          adiabatic_surfaces(p, {rho_min - h, 0}).minus) / (2 * h);
    CHECK(std::abs(slope) < 1e-9);
    CHECK(rho_min == doctest::Approx(-0.5 * x0).epsilon(1e-12));
}

TEST_CASE("adiabatic spinors are eigenvectors in every gauge") {
    const ModelParams p;
    for (Gauge g : {Gauge::CorrelatedMinus, Gauge::NorthernPlus, Gauge::SouthernPlus}) {
        for (Branch b : {Branch::Minus, Branch::Plus}) {
            const Point2 x{-1.3, 0.7};
            const auto h = electronic_hamiltonian(p, x);
            const auto u = adiabatic_spinor(p, x, b, g).u;
            const cplx bm(h.B.x, -h.B.y);
            const cplx hu0 = (h.A + h.B.z) * u[0] + bm * u[1];
            const cplx hu1 = std::conj(bm) * u[0] + (h.A - h.B.z) * u[1];
            const auto e = adiabatic_surfaces(p, x);
            const double en = b == Branch::Minus ? e.minus : e.plus;
            CHECK(std::abs(hu0 - en * u[0]) < 1e-12);
            CHECK(std::abs(hu1 - en * u[1]) < 1e-12);
            CHECK(std::norm(u[0]) + std::norm(u[1]) == doctest::Approx(1.0));
        }
    }
    CHECK(adiabatic_spinor(p, {0, 0}, Branch::Minus, Gauge::CorrelatedMinus).on_seam);
}

TEST_CASE("analytic connection matches a finite-difference i<u|grad u>") {
    const ModelParams p;
    const double h = 1e-5;
    for (Gauge g : {Gauge::CorrelatedMinus, Gauge::NorthernPlus}) {
        const Point2 x{0.8, -1.9};
        const auto u = adiabatic_spinor(p, x, Branch::Minus, g).u;
        auto deriv = [&](Point2 d) {
            const auto up = adiabatic_spinor(p, x + d, Branch::Minus, g).u;
            const auto um = adiabatic_spinor(p, x - d, Branch::Minus, g).u;
            const cplx c = std::conj(u[0]) * (up[0] - um[0]) + std::conj(u[1]) * (up[1] - um[1]);
            return (cplx(0, 1) * c / (2 * h)).real();
        };
        const Point2 a = analytic_connection(p, x, g);
        CHECK(a.x == doctest::Approx(deriv({h, 0})).epsilon(1e-7));
        CHECK(a.y == doctest::Approx(deriv({0, h})).epsilon(1e-7));
        // Circulation of grad(beta)/2 on any loop around the seam is pi.
        const double rho = norm(x);
        const double circ = 2 * std::numbers::pi * rho * std::hypot(a.x, a.y);
        CHECK(circ == doctest::Approx(std::numbers::pi));
    }
}

TEST_CASE("initial state is normalized and contained") {
    const ModelParams p;
    const auto grid = Grid2D::square(128, 20.0);
    const auto psi = initial_state(p, grid);
    CHECK(norm_squared(psi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(initial_state(p, Grid2D::square(128, 8.0)), std::invalid_argument);
    ModelParams bad;
    bad.mass_amu = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("adiabatic populations of the two initial states") {
    const auto grid = Grid2D::square(256, 20.0);
    ModelParams p;
    const auto corr = adiabatic_populations(p, initial_state(p, grid));
    CHECK(corr.plus < 1e-10);
    CHECK(corr.minus + corr.plus == doctest::Approx(1.0).epsilon(1e-12));

    p.init_kind = InitKind::Uncorrelated;
    const auto unc = adiabatic_populations(p, initial_state(p, grid));
    // Small-angle oracle: P+ = <beta^2>/4 = (width / x0)^2 / 4.
    const double w = initial_width(p).x;
    const double x0 = initial_center(p).x;
    const double oracle = 0.25 * (w * w) / (x0 * x0);
    CHECK(unc.plus == doctest::Approx(oracle).epsilon(0.02));
    CHECK(std::log10(unc.plus) > -3.5);
    CHECK(std::log10(unc.plus) < -2.5);
    CHECK(unc.minus + unc.plus == doctest::Approx(1.0).epsilon(1e-12));
}
