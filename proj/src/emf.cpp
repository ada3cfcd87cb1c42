#include "geophase/emf.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <sstream>

namespace geophase {

namespace {

void fill_nbo(const ModelParams& p, const Grid2D& grid, Vec3Field& out) {
    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            out[grid.index(i, j)] = electronic_hamiltonian(p, grid.point(i, j)).B / units::hbar;
        }
    }
}

Vec3 tangent_increment(const std::vector<Vec3>& image, std::size_t i) {
    const std::size_t n = image.size();
    const Vec3 d = (image[(i + 1) % n] - image[(i + n - 1) % n]) * 0.5;
    return d - dot(d, image[i]) * image[i];
}

Vec3 sigma_of(cplx a, cplx b) {
    const cplx x = std::conj(a) * b;
    return {2.0 * x.real(), 2.0 * x.imag(), std::norm(a) - std::norm(b)};
}

// d(Sigma) from component derivatives: sigma_of is sesquilinear in (a, b).
Vec3 sigma_variation(cplx a, cplx b, cplx da, cplx db) {
    const cplx x = std::conj(da) * b + std::conj(a) * db;
    return {2.0 * x.real(), 2.0 * x.imag(),
            2.0 * (std::conj(a) * da).real() - 2.0 * (std::conj(b) * db).real()};
}

}  // namespace

EmfFields emf_fields(const ModelParams& p, const Grid2D& grid, const DensityAndSigma& ds,
                     const SigmaGradients& g, const PolarizationField& s, const MomentumFields& m,
                     EmfForm form, const EmfFields* previous) {
    if (!g.has_second) throw std::invalid_argument("emf_fields: second derivatives required");
    const std::size_t size = grid.size();
    const double mass = m.mass;
    const double hbar = units::hbar;

    EmfFields f;
    f.f_nbo.resize(size);
    fill_nbo(p, grid, f.f_nbo);
    if (previous && previous->f_el.size() == size) {
        f.f_el = previous->f_el;
        f.f_mag = previous->f_mag;
    } else {
        f.f_el.assign(size, Vec3{});
        f.f_mag.assign(size, Vec3{});
    }
    f.valid.assign(size, 0);

    for (std::size_t k = 0; k < size; ++k) {
        if (!(s.valid[k] && m.valid[k])) continue;
        const double n = ds.n[k];
        const double w[2] = {m.w_x[k], m.w_y[k]};
        const double pi[2] = {m.pi_x[k], m.pi_y[k]};
        if (form == EmfForm::Reduced) {
            Vec3 el{}, flow{};
            for (int j = 0; j < 2; ++j) {
                el += w[j] * g.dsigma[j][k] + (0.5 * hbar) * g.d2sigma[j][k];
                flow += pi[j] * g.dsigma[j][k];
            }
            f.f_el[k] = el * (-1.0 / (2.0 * mass * n));
            f.f_mag[k] = cross(s.s[k], flow) * (-1.0 / (2.0 * mass * n));
        } else {
            // tau = sum_j (w_j / M) d_j s,  nu = sum_j (pi_j / M) d_j s
            Vec3 tau{}, nu{}, lap{};
            for (int j = 0; j < 2; ++j) {
                tau += (w[j] / mass) * g.ds[j][k];
                nu += (pi[j] / mass) * g.ds[j][k];
                lap += g.d2s[j][k];
            }
            f.f_el[k] = 0.5 * tau - (hbar / (4.0 * mass)) * lap;
            f.f_mag[k] = 0.5 * cross(nu, s.s[k]);
        }
        f.valid[k] = 1;
    }
    return f;
}

EmfBreakdown emf_circulations(const EmfFields& f, const PolarizationField& s, const Grid2D& grid,
                              const LoopPath& path) {
    if (!path.closed) throw PathError("EMF circulation needs a closed path");
    EmfBreakdown b;
    b.coverage = coverage(grid, f.valid, path);
    b.unreliable = b.coverage < 1.0;

    auto image = sample(grid, s.s, path);
    for (Vec3& v : image) v = v / norm(v);
    const auto nbo = sample(grid, f.f_nbo, path);
    const auto el = sample(grid, f.f_el, path);
    const auto mag = sample(grid, f.f_mag, path);
    const std::size_t n = image.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = tangent_increment(image, i);
        b.e_nbo += dot(nbo[i], d);
        b.e_el += dot(el[i], d);
        b.e_mag += dot(mag[i], d);
    }
    b.e_total = b.e_nbo + b.e_el + b.e_mag;
    return b;
}

EmfBreakdown circle_emf(const ModelParams& p, const CircleJets& jets, EmfForm form,
                        double epsilon_th) {
    if (!jets.has_derivatives) throw std::invalid_argument("circle_emf: jets need derivatives");
    const std::size_t n = jets.size();
    const double mass = p.mass();
    const double hbar = units::hbar;
    std::vector<Vec3> s(n), f_nbo(n), f_el(n), f_mag(n);
    std::size_t valid = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = jets.value[0][i];
        const cplx b = jets.value[1][i];
        const double dens = std::norm(a) + std::norm(b);
        if (dens > epsilon_th) ++valid;
        f_nbo[i] = electronic_hamiltonian(p, jets.points[i]).B / hbar;
        if (!(dens > 0.0)) {
            s[i] = Vec3{0.0, 0.0, 1.0};
            continue;
        }
        s[i] = sigma_of(a, b) / dens;
        Vec3 el{}, flow{}, tau{}, nu{}, lap{};
        for (int j = 0; j < 2; ++j) {
            const auto& d1 = j == 0 ? jets.dx : jets.dy;
            const auto& d2 = j == 0 ? jets.dxx : jets.dyy;
            const cplx da = d1[0][i], db = d1[1][i];
            const cplx dda = d2[0][i], ddb = d2[1][i];
            const cplx flux = std::conj(a) * da + std::conj(b) * db;
            const double dn = 2.0 * flux.real();
            const double d2n = 2.0 * ((std::conj(a) * dda).real() + std::norm(da) +
                                      (std::conj(b) * ddb).real() + std::norm(db));
            const double pi = hbar * flux.imag() / dens;
            const double w = -hbar * flux.real() / dens;
            const Vec3 dsig = sigma_variation(a, b, da, db);
            const Vec3 d2sig = sigma_variation(a, b, dda, ddb) + 2.0 * sigma_of(da, db);
            const Vec3 ds = (dsig - s[i] * dn) / dens;
            const Vec3 d2s = (d2sig - 2.0 * dn * ds - s[i] * d2n) / dens;
            el += w * dsig + (0.5 * hbar) * d2sig;
            flow += pi * dsig;
            tau += (w / mass) * ds;
            nu += (pi / mass) * ds;
            lap += d2s;
        }
        if (form == EmfForm::Reduced) {
            f_el[i] = el * (-1.0 / (2.0 * mass * dens));
            f_mag[i] = cross(s[i], flow) * (-1.0 / (2.0 * mass * dens));
        } else {
            f_el[i] = 0.5 * tau - (hbar / (4.0 * mass)) * lap;
            f_mag[i] = 0.5 * cross(nu, s[i]);
        }
    }
    EmfBreakdown r;
    r.coverage = n ? static_cast<double>(valid) / static_cast<double>(n) : 0.0;
    r.unreliable = r.coverage < 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = tangent_increment(s, i);
        r.e_nbo += dot(f_nbo[i], d);
        r.e_el += dot(f_el[i], d);
        r.e_mag += dot(f_mag[i], d);
    }
    r.e_total = r.e_nbo + r.e_el + r.e_mag;
    return r;
}

EmfBreakdown circle_emf_balance(const ModelParams& p, const SpectralOps& ops,
                                const SpinorField& before, const SpinorField& now,
                                const SpinorField& after, double half_span, Point2 center,
                                double radius, const CircleEmfOptions& opt) {
    if (!(half_span > 0.0)) throw std::invalid_argument("EMF balance: half span must be positive");
    const CircleSeries mid(spinor_spectrum(ops, now), center, radius, true);
    const CircleSeries lo(spinor_spectrum(ops, before), center, radius, false);
    const CircleSeries hi(spinor_spectrum(ops, after), center, radius, false);

    std::size_t n = std::max(std::bit_ceil(opt.min_points), mid.band());
    bool resolved = false;
    while (true) {
        const double eps = opt.epsilon_th;
        resolved = std::max({mid.max_turn(n, eps), lo.max_turn(n, eps), hi.max_turn(n, eps)}) <=
                   opt.max_turn;
        if (resolved || 2 * n > opt.max_points) break;
        n *= 2;
    }

    EmfBreakdown b = circle_emf(p, mid.at(n), opt.form, opt.epsilon_th);
    b.loop_points = n;
    b.resolved = resolved;
    try {
        const double g_lo = circle_phase(lo.at(n), opt.loop, opt.epsilon_th).gamma;
        const double g_hi = circle_phase(hi.at(n), opt.loop, opt.epsilon_th).gamma;
        b.fd_rate = -wrap_pi(g_hi - g_lo) / (2.0 * half_span);
    } catch (const PathError&) {
        b.fd_rate = std::numeric_limits<double>::quiet_NaN();
    }
    return b;
}

EomResidual polarization_eom_residual(const ModelParams& p, const SpinorField& before,
                                      const SpinorField& now, const SpinorField& after,
                                      double half_span, const SpectralOps& ops, double epsilon_th) {
    if (!(before.grid == now.grid) || !(after.grid == now.grid)) {
        throw std::invalid_argument("EOM residual: snapshots on different grids");
    }
    if (!(half_span > 0.0)) throw std::invalid_argument("EOM residual: half span must be positive");
    const Grid2D& grid = now.grid;
    const double mass = p.mass();
    const double hbar = units::hbar;

    const auto ds = sigma_and_density(now);
    const auto d = spinor_derivatives(ops, now, true);
    const auto g = sigma_gradients(now, ds, d);
    const auto pol = polarization(ds, epsilon_th);
    const auto mom = complex_momentum(now, ds, d, mass, epsilon_th);

    EomResidual r;
    const std::size_t size = grid.size();
    r.residual.assign(size, Vec3{});
    r.s = pol.s;
    r.s_dot.assign(size, Vec3{});
    r.omega.assign(size, 0.0);
    r.valid = pol.valid;

    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            const std::size_t k = grid.index(i, j);
            const Vec3 field = electronic_hamiltonian(p, grid.point(i, j)).B;
            r.omega[k] = 2.0 * norm(field) / hbar;
            if (!r.valid[k]) continue;

            // Time derivative taken on the spinor, then carried to s by the
            // quotient rule so that s . ds/dt vanishes identically.
            const cplx a = now.psi1[k];
            const cplx b = now.psi2[k];
            const cplx at = (after.psi1[k] - before.psi1[k]) / (2.0 * half_span);
            const cplx bt = (after.psi2[k] - before.psi2[k]) / (2.0 * half_span);
            const cplx xt = std::conj(at) * b + std::conj(a) * bt;
            const double daa = 2.0 * (std::conj(a) * at).real();
            const double dbb = 2.0 * (std::conj(b) * bt).real();
            const double n = ds.n[k];
            const Vec3 s = pol.s[k];
            const Vec3 sigma_t{2.0 * xt.real(), 2.0 * xt.imag(), daa - dbb};
            const Vec3 s_t = (sigma_t - s * (daa + dbb)) / n;

            const double v[2] = {mom.pi_x[k] / mass, mom.pi_y[k] / mass};
            const double u[2] = {mom.w_x[k] / mass, mom.w_y[k] / mass};
            Vec3 s_dot = s_t;
            Vec3 tau{}, spread{};
            for (int q = 0; q < 2; ++q) {
                s_dot += v[q] * g.ds[q][k];
                tau += u[q] * g.ds[q][k];
                spread += cross(g.d2s[q][k], s);
            }
            const Vec3 rhs = cross((2.0 / hbar) * field + tau, s) - (hbar / (2.0 * mass)) * spread;
            r.s_dot[k] = s_dot;
            r.residual[k] = s_dot - rhs;
        }
    }
    return r;
}

EomResidual polarization_eom_residual(const ModelParams& p, const SpinorField& now, double h,
                                      double epsilon_th) {
    const SplitOperator forward(p, now.grid, h);
    const SplitOperator backward(p, now.grid, -h);
    SpinorField after = now;
    SpinorField before = now;
    forward.step(after);
    backward.step(before);
    return polarization_eom_residual(p, before, now, after, h, forward.ops(), epsilon_th);
}

EomSummary summarize(const EomResidual& r) {
    EomSummary out;
    std::vector<double> rel;
    rel.reserve(r.residual.size());
    for (std::size_t k = 0; k < r.residual.size(); ++k) {
        if (!r.valid[k]) continue;
        const double scale = norm(r.s_dot[k]) + r.omega[k];
        if (scale > 0.0) rel.push_back(norm(r.residual[k]) / scale);
        out.max_orthogonality = std::max(out.max_orthogonality, std::abs(dot(r.residual[k], r.s[k])));
    }
    out.valid_points = rel.size();
    if (!rel.empty()) {
        auto mid = rel.begin() + static_cast<std::ptrdiff_t>(rel.size() / 2);
        std::nth_element(rel.begin(), mid, rel.end());
        out.median_relative = *mid;
    }
    return out;
}

}  // namespace geophase
