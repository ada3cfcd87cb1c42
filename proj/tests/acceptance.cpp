// Acceptance suite: one PASS/FAIL line per criterion.
//
//   geophase_acceptance --config configs/desk.ini --workdir DIR [--reuse] [--strict]
//
// The desk configuration drives two runs: a 0-40 fs run (timed) for the post-transient
// phase, and the full run for the phase history, EMF balance, conservation and the
// mid-run snapshot checks. Exit status is nonzero only with --strict and a failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geophase/circle.hpp"
#include "geophase/config.hpp"
#include "geophase/emf.hpp"
#include "geophase/geometry.hpp"
#include "geophase/propagator.hpp"
#include "geophase/run.hpp"
#include "geophase/snapshot.hpp"

namespace fs = std::filesystem;
using namespace geophase;
constexpr double pi = std::numbers::pi;

namespace {

struct Verdict {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

using Row = std::map<std::string, double>;

std::vector<Row> read_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) names.push_back(cell);
    }
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        Row r;
        std::size_t k = 0;
        for (std::string cell; std::getline(ss, cell, ',') && k < names.size(); ++k) {
            r[names[k]] = std::strtod(cell.c_str(), nullptr);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

// Distance of a phase from the adiabatic value pi (mod 2 pi), in units of pi.
double off_pi(double gamma_over_pi) {
    return 1.0 - std::abs(wrap_pi(gamma_over_pi * pi)) / pi;
}

bool complete(const fs::path& run_dir, const RunConfig& c) {
    std::ifstream in(run_dir / "manifest.json");
    if (!in) return false;
    const auto m = nlohmann::json::parse(in, nullptr, false);
    return !m.is_discarded() && m.value("status", "") == "complete" &&
           m.value("config_hash_sha256", "") == c.hash();
}

double timed_run(const RunConfig& c, bool reuse) {
    if (reuse && complete(c.output_dir, c)) return std::nan("");
    fs::remove_all(c.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    run_simulation(c);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* method_name(int m) { return m == 0 ? "s-formula" : "momentum"; }
const char* method_column(int m) {
    return m == 0 ? "gamma_over_pi_sformula" : "gamma_over_pi_momentum";
}

Verdict topological_phase(const fs::path& dir, double wall, const std::vector<double>& radii) {
    const auto rows = read_csv(dir / "phase.csv");
    double worst = 0.0;
    std::string where;
    std::size_t uncovered = 0, used = 0;
    for (const auto& r : rows) {
        const double t = r.at("time_fs");
        if (t < 25.0 || t > 40.0) continue;
        if (std::find(radii.begin(), radii.end(), r.at("R_a0")) == radii.end()) continue;
        if (r.at("coverage_fraction") < 1.0) {
            ++uncovered;
            continue;
        }
        ++used;
        for (int m = 0; m < 2; ++m) {
            const double d = off_pi(r.at(method_column(m)));
            if (d > worst) {
                worst = d;
                where = fmt("R=%.1f %s t=%.1f fs", r.at("R_a0"), method_name(m), t);
            }
        }
    }
    const bool fast = std::isnan(wall) || wall <= 300.0;
    const bool ok = used > 0 && uncovered == 0 && worst <= 0.03 && fast;
    std::string runtime = std::isnan(wall) ? "reused run" : fmt("runtime %.0f s (<= 300)", wall);
    return {1, "topological phase pi over 25-40 fs", ok,
            fmt("max | |G| - pi | = %.4f pi at %s (<= 0.03 pi), %zu samples, %zu uncovered, ",
                worst, where.c_str(), used, uncovered) + runtime};
}

Verdict transient_and_return(const fs::path& dir, const std::vector<double>& radii) {
    const auto rows = read_csv(dir / "phase.csv");
    bool ok = true;
    std::string detail;
    for (double radius : radii) {
        for (int m = 0; m < 2; ++m) {
            double peak = 0.0, t_peak = 0.0, last = 0.0, t_last = 0.0;
            for (const auto& r : rows) {
                if (r.at("R_a0") != radius || r.at("coverage_fraction") < 1.0) continue;
                if (r.at("time_fs") < 25.0) continue;  // loops still filling
                const double d = off_pi(r.at(method_column(m)));
                if (d > peak) {
                    peak = d;
                    t_peak = r.at("time_fs");
                }
                last = d;
                t_last = r.at("time_fs");
            }
            const bool inside = peak > 0.05 && t_peak >= 50.0 && t_peak <= 110.0;
            const bool back = last <= 0.03;
            ok = ok && inside && back;
            detail += fmt("%sR=%.1f %s peak %.3f pi at %.1f fs, %.3f pi at %.0f fs",
                          detail.empty() ? "" : "; ", radius, method_name(m), peak, t_peak, last,
                          t_last);
        }
    }
    return {2, "transient in 50-110 fs and return", ok,
            detail + " (max over t >= 25 fs: > 0.05 pi inside the window, end <= 0.03 pi)"};
}

Verdict emf_balance(const fs::path& dir) {
    const auto rows = read_csv(dir / "emf.csv");
    std::vector<double> diff, fd, nbo, el;
    for (const auto& r : rows) {
        if (std::abs(r.at("R_a0") - 1.0) > 1e-12 || r.at("coverage_fraction") < 1.0) continue;
        if (!std::isfinite(r.at("fd_rate_per_au"))) continue;
        diff.push_back(r.at("e_total_per_au") - r.at("fd_rate_per_au"));
        fd.push_back(r.at("fd_rate_per_au"));
        nbo.push_back(r.at("e_nbo_per_au"));
        el.push_back(r.at("e_el_per_au"));
    }
    const double ratio = rms(fd) > 0.0 ? rms(diff) / rms(fd) : std::nan("");
    const bool ok = !fd.empty() && ratio <= 0.05 && rms(nbo) < rms(el);
    return {3, "EMF balance on R = 1", ok,
            fmt("%zu samples, RMS(total - fd) / RMS(fd) = %.4f (<= 0.05), RMS(nbo) = %.3g, "
                "RMS(el) = %.3g",
                fd.size(), ratio, rms(nbo), rms(el))};
}

Verdict quantization(const RunConfig& c) {
    const Grid2D grid = c.grid();
    const SpectralOps ops(grid);
    const auto psi = initial_state(c.model, grid);
    const auto ds = sigma_and_density(psi);
    const auto m = complex_momentum(psi, ds, spinor_derivatives(ops, psi, false), c.model.mass(),
                                    c.epsilon_th);
    const Point2 x0 = initial_center(c.model);
    const std::vector<std::pair<Point2, double>> loops = {
        {x0, 0.2}, {x0, 0.4}, {x0, 0.6}, {x0, 0.8}, {{x0.x + 0.15, x0.y - 0.1}, 0.5}};
    double worst = 0.0;
    std::string ints;
    bool covered = true;
    for (const auto& [center, radius] : loops) {
        const auto path = make_circle(grid, radius, 512, Sampling::Bilinear, center);
        covered = covered && coverage(grid, m.valid, path) == 1.0;
        const auto q = quantization_integer(c.model, m, grid, c.model.gauge, path);
        worst = std::max(worst, q.residual);
        ints += fmt("%s%ld", ints.empty() ? "" : ",", q.integer);
    }
    return {4, "circulation quantization at t = 0", covered && worst <= 0.02,
            fmt("5 loops, integers %s, max distance to integer %.2e (<= 0.02)", ints.c_str(),
                worst)};
}

Verdict constant_latitude(const RunConfig& c) {
    const Grid2D grid = c.grid();
    const auto path = make_circle(grid, 5.0, 512, Sampling::Bilinear);
    double worst = 0.0;
    for (double theta : {pi / 6, pi / 3, pi / 2, 2 * pi / 3}) {
        PolarizationField s;
        s.s.resize(grid.size());
        s.valid.assign(grid.size(), 1);
        for (std::size_t i = 0; i < grid.n_x(); ++i) {
            for (std::size_t j = 0; j < grid.n_y(); ++j) {
                const double phi = std::atan2(grid.y(j), grid.x(i));
                s.s[grid.index(i, j)] = {std::sin(theta) * std::cos(phi),
                                         std::sin(theta) * std::sin(phi), std::cos(theta)};
            }
        }
        const double g = loop_phase_from_s(s, grid, path).gamma;
        worst = std::max(worst, std::abs(wrap_pi(g - constant_latitude_phase(theta))));
    }
    return {5, "constant-latitude solid angle", worst <= 1e-3,
            fmt("theta in {pi/6, pi/3, pi/2, 2pi/3}, 512 points, max error %.2e rad (<= 1e-3)",
                worst)};
}

Verdict conservation(const fs::path& dir, const RunConfig& c) {
    const auto rows = read_csv(dir / "observables.csv");
    const double horizon = 1e4 * c.dt;
    const double n0 = rows.front().at("norm_dimless");
    const double e0 = rows.front().at("energy_hartree");
    double dn = 0.0, de = 0.0, closure = 0.0, unit = 0.0, p_plus = 0.0;
    for (const auto& r : rows) {
        const double n = r.at("norm_dimless");
        const double sum = r.at("pop_lower_dimless") + r.at("pop_upper_dimless");
        closure = std::max(closure, std::abs(sum - n));
        unit = std::max(unit, std::abs(sum - 1.0));
        p_plus = std::max(p_plus, r.at("pop_upper_dimless"));
        if (r.at("time_au") > horizon + 1e-9) continue;
        dn = std::max(dn, std::abs(n - n0) / n0);
        de = std::max(de, std::abs(r.at("energy_hartree") - e0) / std::abs(e0));
    }
    const bool ok = dn <= 1e-10 && de <= 1e-6 && closure <= 1e-12 && p_plus <= 1e-4;
    return {6, "conservation and populations", ok,
            fmt("over 1e4 steps: norm drift %.2e (<= 1e-10), energy drift %.2e (<= 1e-6); "
                "|P- + P+ - norm| %.1e, |P- + P+ - 1| %.1e (<= 1e-12); max P+ %.2e (<= 1e-4)",
                dn, de, closure, unit, p_plus)};
}

struct Snapshot {
    SpinorField psi;
    double time_au = 0.0;
};

Snapshot snapshot_near(const fs::path& dir, double t_fs) {
    fs::path best;
    double gap = 1e300;
    for (const auto& stem : list_snapshots(dir)) {
        const double d = std::abs(read_snapshot_header(stem).time_au * units::au_time_to_fs - t_fs);
        if (d < gap) {
            gap = d;
            best = stem;
        }
    }
    Snapshot s;
    s.psi = read_spinor_snapshot(best, &s.time_au);
    return s;
}

// Random arcs inside the dense part of the state; returns the worst identity residual. Arcs
// start at 4000 points and are refined where the phase varies fast.
double open_arc_residual(const ModelParams& p, const SpinorField& psi, double epsilon_th,
                         Point2 center, double spread, double r_lo, double r_hi,
                         std::mt19937_64& rng, std::size_t& accepted) {
    const Grid2D& grid = psi.grid;
    const SpectralOps ops(grid);
    const auto ds = sigma_and_density(psi);
    const auto m =
        complex_momentum(psi, ds, spinor_derivatives(ops, psi, false), p.mass(), epsilon_th);
    const auto spec = spinor_spectrum(ops, psi);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    accepted = 0;
    for (int tries = 0; tries < 2000 && accepted < 20; ++tries) {
        const Point2 c{center.x + spread * (2 * u(rng) - 1), center.y + spread * (2 * u(rng) - 1)};
        const double radius = r_lo + (r_hi - r_lo) * u(rng);
        const double a = 2 * pi * u(rng);
        const double span = (0.3 + 1.5 * pi * u(rng)) * (u(rng) < 0.5 ? -1 : 1);
        const auto arc = make_arc(grid, c, radius, a, a + span, 4000, Sampling::Bilinear);
        if (coverage(grid, m.valid, arc) < 1.0) continue;
        ++accepted;
        worst = std::max(worst, std::abs(open_path_phases(spec, arc).identity_residual()));
    }
    return worst;
}

Verdict open_path(const RunConfig& c, const fs::path& dir) {
    std::mt19937_64 rng(20240611);
    const Grid2D grid = c.grid();
    std::size_t n0 = 0, n1 = 0;
    const double r0 = open_arc_residual(c.model, initial_state(c.model, grid), c.epsilon_th,
                                        initial_center(c.model), 0.2, 0.1, 0.5, rng, n0);
    const auto mid = snapshot_near(dir, 60.0);
    const double r1 = open_arc_residual(c.model, mid.psi, c.epsilon_th, {0.0, 0.0}, 0.5, 1.5,
                                        3.0, rng, n1);
    const bool ok = n0 == 20 && r0 <= 0.01 && n1 == 20 && r1 <= 0.01;
    return {7, "open-path phase identity", ok,
            fmt("20 arcs at t = 0: max residual %.2e rad; %zu arcs at %.1f fs: max residual "
                "%.2e rad (<= 0.01)",
                r0, n1, mid.time_au * units::au_time_to_fs, r1)};
}

Verdict eom(const RunConfig& c, const fs::path& dir) {
    const auto mid = snapshot_near(dir, 60.0);
    const auto r = polarization_eom_residual(c.model, mid.psi, 0.05, c.epsilon_th);
    const auto s = summarize(r);
    return {8, "polarization equation of motion", s.median_relative <= 1e-2 &&
                                                      s.max_orthogonality <= 1e-8,
            fmt("t = %.1f fs, %zu nodes: median relative residual %.2e (<= 1e-2), "
                "max |r.s| %.2e (<= 1e-8)",
                mid.time_au * units::au_time_to_fs, s.valid_points, s.median_relative,
                s.max_orthogonality)};
}

double state_distance(const SpinorField& a, const SpinorField& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.psi1.size(); ++k) {
        s += std::norm(a.psi1[k] - b.psi1[k]) + std::norm(a.psi2[k] - b.psi2[k]);
    }
    return std::sqrt(s * a.grid.cell_area());
}

// log2 of the ratio of one-step defects ||S(h) - S(h/2)^2|| at h = dt and dt/2.
double local_order(const ModelParams& p, const SpinorField& psi, double dt) {
    double defect[2];
    for (int level = 0; level < 2; ++level) {
        const double h = dt / (1 << level);
        const SplitOperator big(p, psi.grid, h), half(p, psi.grid, h / 2);
        SpinorField one = psi, two = psi;
        big.step(one);
        half.step(two);
        half.step(two);
        defect[level] = state_distance(one, two);
    }
    return std::log2(defect[0] / defect[1]);
}

Verdict splitting_order(const RunConfig& c, const fs::path& dir) {
    const double o0 = local_order(c.model, initial_state(c.model, c.grid()), c.dt);
    const auto mid = snapshot_near(dir, 60.0);
    const double o1 = local_order(c.model, mid.psi, c.dt);
    return {9, "splitting order", std::min(o0, o1) >= 2.8,
            fmt("one-step defect order at dt = %.3g, %.3g, %.3g: %.3f at t = 0, %.3f at %.1f fs "
                "(>= 2.8)",
                c.dt, c.dt / 2, c.dt / 4, o0, o1, mid.time_au * units::au_time_to_fs)};
}

Verdict precision(const RunConfig& c, const fs::path& work) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = diagnose_precision(c, work / "precision.csv");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {10, "round-trip error vs density", r.spearman > 0.9 && wall <= 10.0,
            fmt("%zu nodes above %.0e, rank correlation %.4f (> 0.9), %.2f s (<= 10)",
                r.report.samples.size(), c.epsilon_th, r.spearman, wall)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geophase acceptance suite"};
    fs::path config_file, workdir = "acceptance";
    bool reuse = false, strict = false;
    app.add_option("--config", config_file, "run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--workdir", workdir, "scratch directory for runs");
    app.add_flag("--reuse", reuse, "keep completed runs with a matching config hash");
    app.add_flag("--strict", strict, "exit nonzero if any criterion fails");
    CLI11_PARSE(app, argc, argv);

    fs::create_directories(workdir);
    RunConfig full = load_config(config_file);
    full.output_dir = workdir / "full";
    RunConfig early = full;
    early.t_final_fs = 40.0;
    early.emf_radii.clear();
    early.output_dir = workdir / "early";

    std::vector<Verdict> out;
    auto report = [&](Verdict v) {
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", v.id, v.name.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
        out.push_back(std::move(v));
    };

    report(quantization(full));
    report(constant_latitude(full));
    report(precision(full, workdir));

    const double wall = timed_run(early, reuse);
    report(topological_phase(early.output_dir, wall, early.radii));

    timed_run(full, reuse);
    report(transient_and_return(full.output_dir, full.radii));
    report(emf_balance(full.output_dir));
    report(conservation(full.output_dir, full));
    report(open_path(full, full.output_dir));
    report(eom(full, full.output_dir));
    report(splitting_order(full, full.output_dir));

    const auto passed = std::count_if(out.begin(), out.end(), [](const Verdict& v) { return v.pass; });
    std::printf("%td of %zu criteria pass\n", passed, out.size());
    return strict && passed != static_cast<std::ptrdiff_t>(out.size()) ? 1 : 0;
}
