#include "geophase/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace geophase {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double segment(const Point2& a, const Point2& b) { return std::hypot(b.x - a.x, b.y - a.y); }

std::size_t wrap_index(long i, std::size_t n) {
    const long m = static_cast<long>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

// Interpolation stencil of one path point: a single node (snapped) or four (bilinear).
struct Stencil {
    std::array<std::size_t, 4> k{};
    std::array<double, 4> w{};
    int count = 0;
};

Stencil stencil_at(const Grid2D& g, Point2 x, Sampling sampling) {
    const double fi = (x.x + 0.5 * g.length_x()) / g.dx();
    const double fj = (x.y + 0.5 * g.length_y()) / g.dy();
    Stencil st;
    if (sampling == Sampling::GridSnapped) {
        st.k[0] = g.index(wrap_index(std::lround(fi), g.n_x()), wrap_index(std::lround(fj), g.n_y()));
        st.w[0] = 1.0;
        st.count = 1;
        return st;
    }
    const double i0 = std::floor(fi);
    const double j0 = std::floor(fj);
    const double tx = fi - i0;
    const double ty = fj - j0;
    const std::size_t ia = wrap_index(static_cast<long>(i0), g.n_x());
    const std::size_t ib = wrap_index(static_cast<long>(i0) + 1, g.n_x());
    const std::size_t ja = wrap_index(static_cast<long>(j0), g.n_y());
    const std::size_t jb = wrap_index(static_cast<long>(j0) + 1, g.n_y());
    st.k = {g.index(ia, ja), g.index(ib, ja), g.index(ia, jb), g.index(ib, jb)};
    st.w = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    st.count = 4;
    return st;
}

template <class T, class Field>
T interpolate(const Stencil& st, const Field& f) {
    T acc{};
    for (int q = 0; q < st.count; ++q) acc = acc + f[st.k[q]] * st.w[q];
    return acc;
}

bool stencil_valid(const Stencil& st, const Mask& valid) {
    for (int q = 0; q < st.count; ++q) {
        if (st.w[q] != 0.0 && !valid[st.k[q]]) return false;
    }
    return true;
}

template <class T, class Field>
std::vector<T> sample_impl(const Grid2D& grid, const Field& f, const LoopPath& path) {
    if (f.size() != grid.size()) throw std::invalid_argument("sample: field/grid size mismatch");
    std::vector<T> out;
    out.reserve(path.n_points());
    for (const Point2& x : path.points) out.push_back(interpolate<T>(stencil_at(grid, x, path.sampling), f));
    return out;
}

Point2 snap(const Grid2D& g, Point2 x) {
    const long i = std::lround((x.x + 0.5 * g.length_x()) / g.dx());
    const long j = std::lround((x.y + 0.5 * g.length_y()) / g.dy());
    return {g.x(wrap_index(i, g.n_x())), g.y(wrap_index(j, g.n_y()))};
}

// Snaps every point to its node and drops repeats, preserving order.
std::vector<Point2> snap_unique(const Grid2D& g, const std::vector<Point2>& pts) {
    std::vector<Point2> out;
    std::set<std::pair<double, double>> seen;
    for (const Point2& p : pts) {
        const Point2 s = snap(g, p);
        if (seen.insert({s.x, s.y}).second) out.push_back(s);
    }
    return out;
}

void check_inside(const Grid2D& grid, Point2 center, double radius) {
    if (!(radius > 0.0)) throw PathError("path radius must be positive");
    const double hx = 0.5 * grid.length_x();
    const double hy = 0.5 * grid.length_y();
    if (center.x - radius < -hx || center.x + radius >= hx || center.y - radius < -hy ||
        center.y + radius >= hy) {
        std::ostringstream os;
        os << "circle of radius " << radius << " a0 does not fit in the " << grid.length_x() << " x "
           << grid.length_y() << " a0 box";
        throw PathError(os.str());
    }
}

// Closed paths are traversed with the closing segment appended.
std::vector<Point2> traversal(const LoopPath& path) {
    std::vector<Point2> pts = path.points;
    if (path.closed && !pts.empty()) pts.push_back(pts.front());
    return pts;
}

double line_integral(const std::vector<Point2>& pts, const std::vector<double>& fx,
                     const std::vector<double>& fy) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double dx = pts[i + 1].x - pts[i].x;
        const double dy = pts[i + 1].y - pts[i].y;
        acc += 0.5 * ((fx[i] + fx[i + 1]) * dx + (fy[i] + fy[i + 1]) * dy);
    }
    return acc;
}

// Path sampled with the closing point duplicated, so open-path code serves both kinds.
LoopPath as_open(const LoopPath& path) {
    LoopPath open = path;
    open.points = traversal(path);
    open.closed = false;
    return open;
}

double bloch_sum(std::span<const Vec3> s, const Vec3& e1, const Vec3& e2, const Vec3& e3) {
    const std::size_t n = s.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& c = s[i];
        const Vec3 d = (s[(i + 1) % n] - s[(i + n - 1) % n]) * 0.5;
        const double sx = dot(c, e1), sy = dot(c, e2), sz = dot(c, e3);
        const double dx = dot(d, e1), dy = dot(d, e2);
        acc += (sx * dy - sy * dx) / (1.0 + sz);
    }
    return -0.5 * acc;
}

double min_projection(std::span<const Vec3> s, const Vec3& axis) {
    double m = 1.0;
    for (const Vec3& v : s) m = std::min(m, dot(v, axis));
    return m;
}

// Right-handed orthonormal frame with the given third axis.
std::array<Vec3, 3> frame_with_north(const Vec3& north) {
    const Vec3 helper = std::abs(north.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 e1 = cross(helper, north);
    e1 = e1 / norm(e1);
    const Vec3 e2 = cross(north, e1);
    return {e1, e2, north};
}

}  // namespace

double LoopPath::max_spacing() const {
    const auto pts = traversal(*this);
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) m = std::max(m, segment(pts[i], pts[i + 1]));
    return m;
}

double LoopPath::length() const {
    const auto pts = traversal(*this);
    double l = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) l += segment(pts[i], pts[i + 1]);
    return l;
}

LoopPath make_circle(const Grid2D& grid, double radius, std::size_t n_points, Sampling sampling,
                     Point2 center) {
    check_inside(grid, center, radius);
    if (n_points < 3) throw PathError("a closed path needs at least 3 points");
    LoopPath path;
    path.closed = true;
    path.sampling = sampling;
    path.points.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double phi = two_pi * static_cast<double>(i) / static_cast<double>(n_points);
        path.points.push_back({center.x + radius * std::cos(phi), center.y + radius * std::sin(phi)});
    }
    if (sampling == Sampling::GridSnapped) path.points = snap_unique(grid, path.points);
    return path;
}

LoopPath make_arc(const Grid2D& grid, Point2 center, double radius, double phi_begin,
                  double phi_end, std::size_t n_points, Sampling sampling) {
    check_inside(grid, center, radius);
    if (n_points < 2) throw PathError("an arc needs at least 2 points");
    LoopPath path;
    path.closed = false;
    path.sampling = sampling;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
        const double phi = phi_begin + (phi_end - phi_begin) * t;
        path.points.push_back({center.x + radius * std::cos(phi), center.y + radius * std::sin(phi)});
    }
    if (sampling == Sampling::GridSnapped) path.points = snap_unique(grid, path.points);
    return path;
}

LoopPath reversed(const LoopPath& path) {
    LoopPath r = path;
    std::reverse(r.points.begin(), r.points.end());
    return r;
}

LoopPath refined(const LoopPath& path, double max_spacing) {
    if (!(max_spacing > 0.0)) throw std::invalid_argument("refined: spacing must be positive");
    const auto pts = traversal(path);
    LoopPath out = path;
    out.points.clear();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double len = segment(pts[i], pts[i + 1]);
        const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / max_spacing)));
        for (std::size_t q = 0; q < pieces; ++q) {
            const double t = static_cast<double>(q) / static_cast<double>(pieces);
            out.points.push_back(pts[i] + t * (pts[i + 1] - pts[i]));
        }
    }
    if (!path.closed && !pts.empty()) out.points.push_back(pts.back());
    return out;
}

void check_resolution(const LoopPath& path, const Grid2D& grid) {
    const double limit = 2.0 * std::max(grid.dx(), grid.dy());
    const double worst = path.max_spacing();
    if (worst > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "path spacing " << worst << " a0 exceeds 2 grid cells (" << limit << " a0)";
        throw PathError(os.str());
    }
}

std::vector<Vec3> sample(const Grid2D& grid, const Vec3Field& f, const LoopPath& path) {
    return sample_impl<Vec3>(grid, f, path);
}

std::vector<double> sample(const Grid2D& grid, const RealField& f, const LoopPath& path) {
    return sample_impl<double>(grid, f, path);
}

std::vector<cplx> sample(const Grid2D& grid, const ComplexField& f, const LoopPath& path) {
    return sample_impl<cplx>(grid, f, path);
}

double coverage(const Grid2D& grid, const Mask& valid, const LoopPath& path) {
    if (path.points.empty()) return 1.0;
    std::size_t ok = 0;
    for (const Point2& x : path.points) ok += stencil_valid(stencil_at(grid, x, path.sampling), valid);
    return static_cast<double>(ok) / static_cast<double>(path.n_points());
}

BlochLoopPhase bloch_loop_phase(std::span<const Vec3> s, const BlochLoopOptions& opt) {
    if (s.size() < 3) throw PathError("closed Bloch image needs at least 3 points");
    std::vector<Vec3> unit(s.begin(), s.end());
    for (Vec3& v : unit) {
        const double l = norm(v);
        if (!(l > 0.0)) throw PathError("zero polarization vector on path");
        v = v / l;
    }
    const double floor = -1.0 + opt.pole_delta;
    BlochLoopPhase out;
    out.north = {0.0, 0.0, 1.0};
    if (min_projection(unit, out.north) >= floor) {
        out.gamma = bloch_sum(unit, {1, 0, 0}, {0, 1, 0}, {0, 0, 1});
        return out;
    }

    // South pole at the antipode of the image centroid; fall back to a sphere search.
    Vec3 centroid{};
    for (const Vec3& v : unit) centroid = centroid + v;
    Vec3 north{};
    double clearance = -2.0;
    if (norm(centroid) > 1e-8) {
        north = centroid / norm(centroid);
        clearance = min_projection(unit, north);
    }
    if (clearance < floor) {
        constexpr std::size_t candidates = 4096;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t c = 0; c < candidates; ++c) {
            const double z = 1.0 - 2.0 * (static_cast<double>(c) + 0.5) / candidates;
            const double r = std::sqrt(1.0 - z * z);
            const double a = golden * static_cast<double>(c);
            const Vec3 axis{r * std::cos(a), r * std::sin(a), z};
            const double m = min_projection(unit, axis);
            if (m > clearance) {
                clearance = m;
                north = axis;
            }
        }
    }
    if (clearance < floor) {
        throw PathError("Bloch image of the path leaves no pole-free orientation");
    }
    const auto f = frame_with_north(north);
    out.gamma = bloch_sum(unit, f[0], f[1], f[2]);
    out.rotated = true;
    out.north = north;
    return out;
}

PhaseRecord loop_phase_from_s(const PolarizationField& s, const Grid2D& grid, const LoopPath& path,
                              bool require_full_coverage, const BlochLoopOptions& opt) {
    if (!path.closed) throw PathError("s-formula phase needs a closed path");
    PhaseRecord rec;
    rec.method = PhaseMethod::SFormula;
    rec.coverage = coverage(grid, s.valid, path);
    rec.flagged = rec.coverage < 1.0;
    if (require_full_coverage && rec.flagged) {
        std::ostringstream os;
        os << "path crosses " << (1.0 - rec.coverage) * 100.0 << "% low-density points";
        throw PathCoverageError(os.str(), rec.coverage);
    }
    const auto image = sample(grid, s.s, path);
    rec.gamma = bloch_loop_phase(image, opt).gamma;
    return rec;
}

PhaseRecord path_phase_from_momentum(const MomentumFields& m, const Grid2D& grid,
                                     const LoopPath& path, bool require_full_coverage) {
    PhaseRecord rec;
    rec.method = PhaseMethod::MomentumCirculation;
    rec.coverage = coverage(grid, m.valid, path);
    rec.flagged = rec.coverage < 1.0;
    if (require_full_coverage && rec.flagged) {
        throw PathCoverageError("momentum circulation over invalid points", rec.coverage);
    }
    const LoopPath open = as_open(path);
    rec.gamma = -line_integral(open.points, sample(grid, m.pi_x, open), sample(grid, m.pi_y, open)) /
                units::hbar;
    return rec;
}

PhaseRecord path_phase_from_increments(const SpinorField& state, const Mask& valid,
                                       const LoopPath& path) {
    const Grid2D& g = state.grid;
    PhaseRecord rec;
    rec.method = PhaseMethod::MomentumCirculation;
    rec.coverage = coverage(g, valid, path);
    rec.flagged = rec.coverage < 1.0;
    const LoopPath open = as_open(path);
    const auto p1 = sample(g, state.psi1, open);
    const auto p2 = sample(g, state.psi2, open);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < p1.size(); ++i) {
        acc += std::arg(std::conj(p1[i]) * p1[i + 1] + std::conj(p2[i]) * p2[i + 1]);
    }
    rec.gamma = -acc;
    return rec;
}

double OpenPathPhases::identity_residual() const { return wrap_pi(-theta_ba + gamma_el - gamma); }

OpenPathPhases open_path_decomposition(const SpinorField& state, const MomentumFields& m,
                                       const LoopPath& path) {
    OpenPathPhases out;
    const LoopPath open = as_open(path);
    if (open.points.size() < 2) return out;
    const Grid2D& g = state.grid;
    const auto p1 = sample(g, state.psi1, open);
    const auto p2 = sample(g, state.psi2, open);
    auto overlap = [&](std::size_t i, std::size_t j) {
        return std::conj(p1[i]) * p1[j] + std::conj(p2[i]) * p2[j];
    };
    const std::size_t last = open.points.size() - 1;
    const cplx ab = overlap(0, last);
    if (std::abs(ab) == 0.0) throw PathError("path endpoints carry orthogonal states");
    out.theta_ba = std::arg(ab);

    double transport = 0.0;
    for (std::size_t i = 0; i < last; ++i) {
        const cplx o = overlap(i, i + 1);
        const double na = std::sqrt(std::norm(p1[i]) + std::norm(p2[i]));
        const double nb = std::sqrt(std::norm(p1[i + 1]) + std::norm(p2[i + 1]));
        if (std::abs(o) < 1e-3 * na * nb) {
            throw PathError("neighbouring path states nearly orthogonal; refine the path");
        }
        transport += std::arg(o);
    }
    out.gamma_el = std::arg(ab) - transport;
    out.gamma = path_phase_from_momentum(m, g, open).gamma;
    return out;
}

QuantizationResult quantization_integer(const ModelParams& p, const MomentumFields& m,
                                        const Grid2D& grid, Gauge gauge, const LoopPath& path) {
    if (!path.closed) throw PathError("quantization needs a closed path");
    const LoopPath open = as_open(path);
    auto fx = sample(grid, m.pi_x, open);
    auto fy = sample(grid, m.pi_y, open);
    for (std::size_t i = 0; i < open.points.size(); ++i) {
        const Point2 a = analytic_connection(p, open.points[i], gauge);
        fx[i] += units::hbar * a.x;
        fy[i] += units::hbar * a.y;
    }
    QuantizationResult q;
    q.value = line_integral(open.points, fx, fy) / (2.0 * std::numbers::pi * units::hbar);
    q.integer = std::lround(q.value);
    q.residual = std::abs(q.value - static_cast<double>(q.integer));
    q.flagged = q.residual > 0.05;
    return q;
}

AdvectResult advect_path(const LoopPath& path, const MomentumFields& m, const Grid2D& grid,
                         double dt) {
    AdvectResult out;
    out.path = path;
    auto velocity = [&](Point2 x, Point2& v) {
        const Stencil st = stencil_at(grid, x, Sampling::Bilinear);
        if (!stencil_valid(st, m.valid)) return false;
        v = {interpolate<double>(st, m.pi_x) / m.mass, interpolate<double>(st, m.pi_y) / m.mass};
        return true;
    };
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        const Point2 x = path.points[i];
        Point2 v1, v2;
        if (!velocity(x, v1) || !velocity(x + (0.5 * dt) * v1, v2)) {
            out.frozen.push_back(i);
            continue;
        }
        out.path.points[i] = x + dt * v2;
    }
    // Advected points leave the grid nodes.
    out.path.sampling = Sampling::Bilinear;
    return out;
}

double wrap_pi(double value) {
    double r = std::remainder(value, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

double unwrap_near(double value, double previous) {
    return value + two_pi * std::round((previous - value) / two_pi);
}

std::vector<Vec3> constant_latitude_image(double theta, std::size_t n_points) {
    std::vector<Vec3> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double phi = two_pi * static_cast<double>(i) / static_cast<double>(n_points);
        out.push_back({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)});
    }
    return out;
}

double constant_latitude_phase(double theta) {
    const double h = std::sin(0.5 * theta);
    return -two_pi * h * h;
}

}  // namespace geophase
