#include "geophase/circle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace geophase {

namespace {

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// exp(i k t) for one axis, with the Nyquist mode replaced by cos(k t) so that real
// fields interpolate to real values.
void phase_row(const std::vector<double>& k, double t, cplx* out) {
    const std::size_t n = k.size();
    for (std::size_t j = 0; j < n; ++j) out[j] = std::polar(1.0, k[j] * t);
    out[n / 2] = cplx(std::cos(k[n / 2] * t), 0.0);
}

// Band-limited resampling of a periodic series from its length to n_out points.
std::vector<cplx> resample(const std::vector<cplx>& in, std::size_t n_out) {
    const std::size_t n_in = in.size();
    if (n_out == n_in) return in;
    std::vector<cplx> spec(in);
    std::vector<cplx> out(n_out, cplx{});
    auto* sp = reinterpret_cast<fftw_complex*>(spec.data());
    fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n_in), sp, sp, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
    const double scale = 1.0 / static_cast<double>(n_in);
    const std::size_t half = n_in / 2;
    for (std::size_t m = 0; m < half; ++m) out[m] = spec[m] * scale;
    for (std::size_t m = half + 1; m < n_in; ++m) out[n_out - (n_in - m)] = spec[m] * scale;
    // Nyquist term shared between +m and -m.
    out[half] += 0.5 * spec[half] * scale;
    out[n_out - half] += 0.5 * spec[half] * scale;
    auto* op = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan bwd = fftw_plan_dft_1d(static_cast<int>(n_out), op, op, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);
    return out;
}

}  // namespace

std::size_t circle_band_samples(const Grid2D& grid, double radius) {
    const double kx = std::numbers::pi / grid.dx();
    const double ky = std::numbers::pi / grid.dy();
    const double band = 2.0 * (std::hypot(kx, ky) * radius + 32.0);
    return std::bit_ceil(static_cast<std::size_t>(std::ceil(band)));
}

SpinorSpectrum spinor_spectrum(const SpectralOps& ops, const SpinorField& state) {
    SpinorSpectrum s{state.grid, state.psi1, state.psi2};
    ops.forward(s.c1);
    ops.forward(s.c2);
    const double inv = 1.0 / static_cast<double>(state.grid.size());
    for (auto& z : s.c1) z *= inv;
    for (auto& z : s.c2) z *= inv;
    return s;
}

CircleJets spinor_jets_at(const SpinorSpectrum& spec, const std::vector<Point2>& points,
                          bool with_derivatives) {
    const Grid2D& g = spec.grid;
    const auto nx = static_cast<Eigen::Index>(g.n_x());
    const auto ny = static_cast<Eigen::Index>(g.n_y());
    const auto np = static_cast<Eigen::Index>(points.size());
    const auto& kx = g.kx();
    const auto& ky = g.ky();

    // Coordinates measured from the first node, matching the FFT phase origin.
    RowMatrix ex(np, nx), ey(np, ny);
    for (Eigen::Index p = 0; p < np; ++p) {
        phase_row(kx, points[p].x + 0.5 * g.length_x(), &ex(p, 0));
        phase_row(ky, points[p].y + 0.5 * g.length_y(), &ey(p, 0));
    }
    Eigen::RowVectorXcd wx(nx), wxx(nx), wy(ny), wyy(ny);
    for (Eigen::Index i = 0; i < nx; ++i) {
        wx(i) = cplx(0.0, i == nx / 2 ? 0.0 : kx[i]);
        wxx(i) = -kx[i] * kx[i];
    }
    for (Eigen::Index j = 0; j < ny; ++j) {
        wy(j) = cplx(0.0, j == ny / 2 ? 0.0 : ky[j]);
        wyy(j) = -ky[j] * ky[j];
    }

    CircleJets out;
    out.points = points;
    out.has_derivatives = with_derivatives;
    const ComplexField* coeffs[2] = {&spec.c1, &spec.c2};
    for (int q = 0; q < 2; ++q) {
        Eigen::Map<const RowMatrix> c(coeffs[q]->data(), nx, ny);
        // t(p, i) = sum_j c(i, j) ey(p, j)
        const RowMatrix t0 = ey * c.transpose();
        out.value[q].resize(points.size());
        Eigen::Map<Eigen::VectorXcd>(out.value[q].data(), np) = ex.cwiseProduct(t0).rowwise().sum();
        if (!with_derivatives) continue;
        const RowMatrix t1 = (ey * wy.asDiagonal()) * c.transpose();
        const RowMatrix t2 = (ey * wyy.asDiagonal()) * c.transpose();
        for (auto* v : {&out.dx[q], &out.dy[q], &out.dxx[q], &out.dyy[q]}) v->resize(points.size());
        Eigen::Map<Eigen::VectorXcd>(out.dx[q].data(), np) =
            (ex * wx.asDiagonal()).cwiseProduct(t0).rowwise().sum();
        Eigen::Map<Eigen::VectorXcd>(out.dxx[q].data(), np) =
            (ex * wxx.asDiagonal()).cwiseProduct(t0).rowwise().sum();
        Eigen::Map<Eigen::VectorXcd>(out.dy[q].data(), np) = ex.cwiseProduct(t1).rowwise().sum();
        Eigen::Map<Eigen::VectorXcd>(out.dyy[q].data(), np) = ex.cwiseProduct(t2).rowwise().sum();
    }
    return out;
}

namespace {

std::vector<Point2> circle_points(Point2 center, double radius, std::size_t n) {
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        pts[i] = {center.x + radius * std::cos(phi), center.y + radius * std::sin(phi)};
    }
    return pts;
}

Vec3 unit_polarization(cplx a, cplx b) {
    const cplx x = std::conj(a) * b;
    const Vec3 sigma{2.0 * x.real(), 2.0 * x.imag(), std::norm(a) - std::norm(b)};
    const double len = norm(sigma);
    return len > 0.0 ? sigma / len : Vec3{};
}

}  // namespace

CircleSeries::CircleSeries(const SpinorSpectrum& spec, Point2 center, double radius,
                           bool with_derivatives) {
    if (!(radius > 0.0)) throw std::invalid_argument("circle_jets: radius must be positive");
    const std::size_t band = circle_band_samples(spec.grid, radius);
    coarse_ = spinor_jets_at(spec, circle_points(center, radius, band), with_derivatives);
    coarse_.center = center;
    coarse_.radius = radius;
}

CircleJets CircleSeries::at(std::size_t n_points) const {
    if (n_points < band()) {
        throw std::invalid_argument("circle_jets: " + std::to_string(n_points) +
                                    " points cannot carry the angular band of radius " +
                                    std::to_string(coarse_.radius) + " (need " +
                                    std::to_string(band()) + ")");
    }
    CircleJets out;
    out.center = coarse_.center;
    out.radius = coarse_.radius;
    out.points = circle_points(out.center, out.radius, n_points);
    out.has_derivatives = coarse_.has_derivatives;
    for (int q = 0; q < 2; ++q) {
        out.value[q] = resample(coarse_.value[q], n_points);
        if (!out.has_derivatives) continue;
        out.dx[q] = resample(coarse_.dx[q], n_points);
        out.dy[q] = resample(coarse_.dy[q], n_points);
        out.dxx[q] = resample(coarse_.dxx[q], n_points);
        out.dyy[q] = resample(coarse_.dyy[q], n_points);
    }
    return out;
}

double CircleSeries::max_turn(std::size_t n_points, double min_density) const {
    if (n_points < band()) throw std::invalid_argument("max_turn: fewer points than the band");
    const auto a = resample(coarse_.value[0], n_points);
    const auto b = resample(coarse_.value[1], n_points);
    const auto at = [&](std::size_t i) {
        const bool dense = std::norm(a[i]) + std::norm(b[i]) > min_density;
        return dense ? unit_polarization(a[i], b[i]) : Vec3{};
    };
    double worst = 0.0;
    Vec3 prev = at(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const Vec3 cur = at(i);
        if (norm(prev) > 0.0 && norm(cur) > 0.0) {
            worst = std::max(worst, std::atan2(norm(cross(prev, cur)), dot(prev, cur)));
        }
        prev = cur;
    }
    return worst;
}

CircleJets circle_jets(const SpinorSpectrum& spec, Point2 center, double radius,
                       std::size_t n_points, bool with_derivatives) {
    return CircleSeries(spec, center, radius, with_derivatives).at(n_points);
}

OpenPathPhases open_path_phases(const SpinorSpectrum& spec, const LoopPath& path,
                                double max_step) {
    std::vector<Point2> pts = path.points;
    if (path.closed && !pts.empty()) pts.push_back(pts.front());
    OpenPathPhases out;
    if (pts.size() < 2) return out;

    struct Knot {
        Point2 x;
        cplx a, b;
        double px, py;
    };
    auto evaluate = [&](const std::vector<Point2>& at) {
        const CircleJets j = spinor_jets_at(spec, at, true);
        std::vector<Knot> k(at.size());
        for (std::size_t i = 0; i < at.size(); ++i) {
            const cplx a = j.value[0][i], b = j.value[1][i];
            const double n = std::norm(a) + std::norm(b);
            const cplx fx = std::conj(a) * j.dx[0][i] + std::conj(b) * j.dx[1][i];
            const cplx fy = std::conj(a) * j.dy[0][i] + std::conj(b) * j.dy[1][i];
            k[i] = {at[i], a, b, n > 0.0 ? units::hbar * fx.imag() / n : 0.0,
                    n > 0.0 ? units::hbar * fy.imag() / n : 0.0};
        }
        return k;
    };
    auto overlap = [](const Knot& p, const Knot& q) {
        return std::conj(p.a) * q.a + std::conj(p.b) * q.b;
    };
    // Phase accrued along a segment, by the momentum at either end.
    auto rate_jump = [](const Knot& p, const Knot& q) {
        const double dx = q.x.x - p.x.x, dy = q.x.y - p.x.y;
        return std::abs((q.px - p.px) * dx + (q.py - p.py) * dy) / units::hbar;
    };

    // Bisect segments until the transported phase and the momentum phase both change
    // by at most max_step across each.
    std::vector<Knot> knots = evaluate(pts);
    for (int pass = 0; pass < 48; ++pass) {
        std::vector<Point2> mids;
        std::vector<std::size_t> split;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const Knot &p = knots[i], &q = knots[i + 1];
            if (std::abs(std::arg(overlap(p, q))) > max_step || rate_jump(p, q) > max_step) {
                mids.push_back({0.5 * (p.x.x + q.x.x), 0.5 * (p.x.y + q.x.y)});
                split.push_back(i);
            }
        }
        if (mids.empty()) break;
        const auto added = evaluate(mids);
        std::vector<Knot> next;
        next.reserve(knots.size() + added.size());
        std::size_t s = 0;
        for (std::size_t i = 0; i < knots.size(); ++i) {
            next.push_back(knots[i]);
            if (s < split.size() && split[s] == i) next.push_back(added[s++]);
        }
        knots = std::move(next);
    }

    const cplx ab = overlap(knots.front(), knots.back());
    if (std::abs(ab) == 0.0) throw PathError("path endpoints carry orthogonal states");
    out.theta_ba = std::arg(ab);
    double transport = 0.0, circulation = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const Knot &p = knots[i], &q = knots[i + 1];
        const cplx o = overlap(p, q);
        const double na = std::sqrt(std::norm(p.a) + std::norm(p.b));
        const double nb = std::sqrt(std::norm(q.a) + std::norm(q.b));
        if (std::abs(o) < 1e-3 * na * nb) {
            throw PathError("neighbouring path states nearly orthogonal; refine the path");
        }
        transport += std::arg(o);
        circulation += 0.5 * ((p.px + q.px) * (q.x.x - p.x.x) + (p.py + q.py) * (q.x.y - p.x.y));
    }
    out.gamma_el = std::arg(ab) - transport;
    out.gamma = -circulation / units::hbar;
    return out;
}

PhaseRecord circle_phase(const CircleJets& jets, const BlochLoopOptions& opt, double epsilon_th) {
    const std::size_t n = jets.size();
    std::vector<Vec3> s(n);
    std::size_t valid = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = jets.value[0][i];
        const cplx b = jets.value[1][i];
        const cplx x = std::conj(a) * b;
        const double dens = std::norm(a) + std::norm(b);
        if (dens > epsilon_th) ++valid;
        const Vec3 sigma{2.0 * x.real(), 2.0 * x.imag(), std::norm(a) - std::norm(b)};
        const double len = norm(sigma);
        s[i] = len > 0.0 ? sigma / len : Vec3{0.0, 0.0, 1.0};
    }
    PhaseRecord r;
    r.method = PhaseMethod::SFormula;
    r.coverage = n ? static_cast<double>(valid) / static_cast<double>(n) : 0.0;
    r.flagged = r.coverage < 1.0;
    r.gamma = bloch_loop_phase(s, opt).gamma;
    return r;
}

}  // namespace geophase
