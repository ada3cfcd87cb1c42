#include <doctest.h>

#include <cmath>

#include "geophase/circle.hpp"
#include "geophase/emf.hpp"

using namespace geophase;

TEST_CASE("non-Born-Oppenheimer field is B / hbar") {
    const ModelParams p;
    const auto g = Grid2D::square(128, 32.0);
    SpectralOps ops(g);
    const auto psi = initial_state(p, g);
    const auto ds = sigma_and_density(psi);
    const auto d = spinor_derivatives(ops, psi, true);
    const auto grads = sigma_gradients(psi, ds, d);
    const auto pol = polarization(ds);
    const auto mom = complex_momentum(psi, ds, d, p.mass());
    const auto f = emf_fields(p, g, ds, grads, pol, mom);
    const std::size_t k = g.index(68, 64);  // (1, 0)
    CHECK(g.point(68, 64) == Point2{1.0, 0.0});
    CHECK(f.f_nbo[k].x == doctest::Approx(0.1));
    CHECK(f.f_nbo[k].y == 0.0);
    CHECK(f.f_nbo[k].z == 0.0);
    const auto no_second = sigma_gradients(psi, ds, spinor_derivatives(ops, psi, false));
    CHECK_THROWS_AS(emf_fields(p, g, ds, no_second, pol, mom), std::invalid_argument);
}

TEST_CASE("circle jets agree with direct Fourier evaluation and grid derivatives") {
    ModelParams p;
    p.init_kind = InitKind::Uncorrelated;
    const auto g = Grid2D::square(64, 20.0);
    SplitOperator op(p, g, 0.25);
    auto psi = initial_state(p, g);
    op.advance(psi, 40);
    const auto spec = spinor_spectrum(op.ops(), psi);

    const Point2 c = initial_center(p);
    const double r = 0.5;
    const std::size_t band = circle_band_samples(g, r);
    CHECK(band % 2 == 0);
    CHECK_THROWS_AS(circle_jets(spec, c, r, band / 2, true), std::invalid_argument);
    const auto jets = circle_jets(spec, c, r, 4 * band, true);
    const auto direct = spinor_jets_at(spec, jets.points, true);
    double scale = 0.0, err = 0.0;
    for (int q = 0; q < 2; ++q)
        for (std::size_t i = 0; i < jets.size(); ++i) {
            scale = std::max(scale, std::abs(direct.dxx[q][i]));
            err = std::max({err, std::abs(jets.value[q][i] - direct.value[q][i]),
                            std::abs(jets.dx[q][i] - direct.dx[q][i]),
                            std::abs(jets.dyy[q][i] - direct.dyy[q][i])});
        }
    CHECK(err < 1e-10 * scale);

    // At grid nodes the series reproduces the stored values and spectral derivatives.
    const auto d = spinor_derivatives(op.ops(), psi, true);
    std::vector<Point2> nodes{g.point(10, 20), g.point(15, 32), g.point(0, 63)};
    const auto at_nodes = spinor_jets_at(spec, nodes, true);
    const std::size_t ks[3] = {g.index(10, 20), g.index(15, 32), g.index(0, 63)};
    for (int n = 0; n < 3; ++n) {
        CHECK(std::abs(at_nodes.value[1][n] - psi.psi2[ks[n]]) < 1e-12);
        CHECK(std::abs(at_nodes.dx[0][n] - d.dx[0][ks[n]]) < 1e-10);
        CHECK(std::abs(at_nodes.dyy[1][n] - d.dyy[1][ks[n]]) < 1e-9);
    }
}

TEST_CASE("EMF balances the phase rate and both forms agree") {
    ModelParams p;
    p.init_kind = InitKind::Uncorrelated;
    const auto g = Grid2D::square(128, 20.0);
    SplitOperator op(p, g, 0.25);
    const double h = 0.05;
    SplitOperator fwd(p, g, h), bwd(p, g, -h);
    auto psi = initial_state(p, g);
    op.advance(psi, 400);
    auto after = psi, before = psi;
    fwd.step(after);
    bwd.step(before);
    const Point2 center = initial_center(p) + Point2{0.3, 0.1};
    for (double r : {0.2, 0.4}) {
        const std::size_t n = 2 * circle_band_samples(g, r);
        auto jets = [&](const SpinorField& s, bool derivs) {
            return circle_jets(spinor_spectrum(op.ops(), s), center, r, n, derivs);
        };
        const auto now = jets(psi, true);
        const auto red = circle_emf(p, now, EmfForm::Reduced);
        const auto full = circle_emf(p, now, EmfForm::Full);
        CHECK(red.coverage == 1.0);
        CHECK(full.e_el == doctest::Approx(red.e_el).epsilon(1e-9));
        CHECK(full.e_mag == doctest::Approx(red.e_mag).epsilon(1e-9));
        const double rate = -wrap_pi(circle_phase(jets(after, false)).gamma -
                                     circle_phase(jets(before, false)).gamma) / (2 * h);
        CHECK(red.e_total == doctest::Approx(rate).epsilon(0.02));
    }
}

TEST_CASE("grid-field EMF route matches the circle route on a resolved loop") {
    ModelParams p;
    p.init_kind = InitKind::Uncorrelated;
    const auto g = Grid2D::square(128, 20.0);
    SplitOperator op(p, g, 0.25);
    auto psi = initial_state(p, g);
    op.advance(psi, 400);
    const auto& ops = op.ops();
    const auto ds = sigma_and_density(psi);
    const auto d = spinor_derivatives(ops, psi, true);
    const auto grads = sigma_gradients(psi, ds, d);
    const auto pol = polarization(ds);
    const auto mom = complex_momentum(psi, ds, d, p.mass());
    const auto f = emf_fields(p, g, ds, grads, pol, mom);
    const Point2 center = initial_center(p) + Point2{0.3, 0.1};
    const auto path = make_circle(g, 0.4, 2048, Sampling::Bilinear, center);
    const auto grid_route = emf_circulations(f, pol, g, path);
    const auto jets = circle_jets(spinor_spectrum(ops, psi), center, 0.4, 2048, true);
    const auto exact = circle_emf(p, jets);
    CHECK(grid_route.coverage == 1.0);
    CHECK(grid_route.e_nbo == doctest::Approx(exact.e_nbo).epsilon(0.05));
    CHECK(grid_route.e_total == doctest::Approx(exact.e_total).epsilon(0.1));
}

TEST_CASE("polarization equation of motion holds on an evolved state") {
    ModelParams p;
    const auto g = Grid2D::square(128, 20.0);
    SplitOperator op(p, g, 0.25);
    auto psi = initial_state(p, g);
    op.advance(psi, 400);
    const auto r = polarization_eom_residual(p, psi, 0.01, 1e-8);
    const auto sum = summarize(r);
    CHECK(sum.valid_points > 100);
    CHECK(sum.max_orthogonality < 1e-8);
    CHECK(sum.median_relative < 1e-2);
}
