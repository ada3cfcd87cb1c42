#include <doctest.h>

#include <sstream>

#include "geophase/config.hpp"
#include "geophase/run.hpp"

using namespace geophase;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace

TEST_CASE("defaults are valid and match the desk setup") {
    const RunConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.n_x == 256);
    CHECK(c.dt == 0.25);
    CHECK(c.epsilon_th == 1e-20);
    CHECK(c.max_edge_density == 1e-14);
    CHECK(c.radii == std::vector<double>{2.0, 2.5, 3.0});
    CHECK(c.tracked_radii() == std::vector<double>{2.0, 2.5, 3.0, 1.0});
    CHECK(c.n_steps() == 19844);
    CHECK(c.steps_for(41.25) == 165);
}

TEST_CASE("parsing reads every section") {
    const auto c = parse(
        "[model]\nomega = 5e-3\nkappa = 0.2\ngauge = northern_plus\ninit_kind = uncorrelated\n"
        "[grid]\nn = 128\nlength = 18\n"
        "[propagator]\ndt = 0.1\nt_final_fs = 10\n"
        "[paths]\nradii = 1.5, 2\nemf_radii = 1\nsampling = grid_snapped\n"
        "[fields]\nemf_form = full\n"
        "[cadence]\nphase_au = 0.5\nemf_au = 2\n"
        "[output]\ndirectory = out/x\n");
    CHECK(c.model.omega_x == 5e-3);
    CHECK(c.model.omega_y == 5e-3);
    CHECK(c.model.kappa_y == 0.2);
    CHECK(c.model.gauge == Gauge::NorthernPlus);
    CHECK(c.model.init_kind == InitKind::Uncorrelated);
    CHECK(c.n_y == 128);
    CHECK(c.length_x == 18.0);
    CHECK(c.radii == std::vector<double>{1.5, 2.0});
    CHECK(c.sampling == Sampling::GridSnapped);
    CHECK(c.emf_form == EmfForm::Full);
    CHECK(c.output_dir == "out/x");
}

TEST_CASE("malformed configs raise ConfigError") {
    CHECK_THROWS_AS(parse("[model]\nmass = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[grid]\nn = 12.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[grid]\nn = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\ngauge = sideways\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/geophase.ini"), ConfigError);
}

TEST_CASE("validation rejects inconsistent settings") {
    auto expect_invalid = [](const std::string& text) {
        CHECK_THROWS_AS(parse(text).validate(), ConfigError);
    };
    expect_invalid("[grid]\nn = 200\n");
    expect_invalid("[grid]\nlength = 8\n");
    expect_invalid("[propagator]\ndt = -1\n");
    expect_invalid("[propagator]\ndt = 10\n");
    expect_invalid("[cadence]\nphase_au = 0.3\n");
    expect_invalid("[paths]\nradii = 12\n");
    expect_invalid("[paths]\nn_points = 16\n");
    expect_invalid("[paths]\nemf_points = 64\n");
    expect_invalid("[paths]\npole_delta = 2\n");
    expect_invalid("[model]\nmass_amu = 0\n");
    expect_invalid("[propagator]\nmax_edge_density = 0\n");
}

TEST_CASE("config hash ignores the output directory only") {
    auto a = parse("[output]\ndirectory = one\n");
    auto b = parse("[output]\ndirectory = two\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 64);
    b.dt = 0.125;
    CHECK(a.hash() != b.hash());
    // The canonical form parses back to the same settings.
    const auto c = parse(a.canonical());
    CHECK(c.hash() == a.hash());
}

TEST_CASE("rank correlation") {
    CHECK(spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    // Ties take average ranks: ranks (1.5, 1.5, 3) against (1, 2, 3).
    CHECK(spearman_correlation({5, 5, 7}, {1, 2, 3}) == doctest::Approx(0.8660254).epsilon(1e-6));
}
