#include "geophase/fields.hpp"

#include <algorithm>
#include <stdexcept>

namespace geophase {

DensityAndSigma sigma_and_density(const SpinorField& state) {
    const std::size_t n = state.psi1.size();
    DensityAndSigma out;
    out.n.resize(n);
    out.sigma.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx a = state.psi1[k];
        const cplx b = state.psi2[k];
        const cplx ab = std::conj(a) * b;
        out.n[k] = std::norm(a) + std::norm(b);
        out.sigma[k] = {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)};
    }
    return out;
}

std::size_t PolarizationField::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

SigmaGradients sigma_gradients(const SpinorField& state, const DensityAndSigma& ds,
                               const SpinorDerivatives& d) {
    const std::size_t size = state.psi1.size();
    SigmaGradients g;
    g.has_second = d.has_second;
    for (int axis = 0; axis < 2; ++axis) {
        const ComplexField* da = axis == 0 ? &d.dx[0] : &d.dy[0];
        const ComplexField* db = axis == 0 ? &d.dx[1] : &d.dy[1];
        const ComplexField* dda = axis == 0 ? &d.dxx[0] : &d.dyy[0];
        const ComplexField* ddb = axis == 0 ? &d.dxx[1] : &d.dyy[1];
        g.dn[axis].assign(size, 0.0);
        g.dsigma[axis].assign(size, Vec3{});
        g.ds[axis].assign(size, Vec3{});
        if (d.has_second) {
            g.d2n[axis].assign(size, 0.0);
            g.d2sigma[axis].assign(size, Vec3{});
            g.d2s[axis].assign(size, Vec3{});
        }
        for (std::size_t k = 0; k < size; ++k) {
            const cplx a = state.psi1[k];
            const cplx b = state.psi2[k];
            const cplx a1 = (*da)[k];
            const cplx b1 = (*db)[k];
            const cplx x1 = std::conj(a1) * b + std::conj(a) * b1;  // d(a* b)
            const double daa = 2.0 * (std::conj(a) * a1).real();  // d|a|^2
            const double dbb = 2.0 * (std::conj(b) * b1).real();
            const double dn = daa + dbb;
            const Vec3 dsig{2.0 * x1.real(), 2.0 * x1.imag(), daa - dbb};
            g.dn[axis][k] = dn;
            g.dsigma[axis][k] = dsig;

            const double n = ds.n[k];
            if (!(n > 0.0)) continue;
            const Vec3 s = ds.sigma[k] / n;
            const Vec3 s1 = (dsig - s * dn) / n;
            g.ds[axis][k] = s1;

            if (d.has_second) {
                const cplx a2 = (*dda)[k];
                const cplx b2 = (*ddb)[k];
                const cplx x2 = std::conj(a2) * b + 2.0 * std::conj(a1) * b1 + std::conj(a) * b2;
                const double d2aa = 2.0 * (std::conj(a) * a2).real() + 2.0 * std::norm(a1);
                const double d2bb = 2.0 * (std::conj(b) * b2).real() + 2.0 * std::norm(b1);
                const double d2n = d2aa + d2bb;
                const Vec3 d2sig{2.0 * x2.real(), 2.0 * x2.imag(), d2aa - d2bb};
                g.d2n[axis][k] = d2n;
                g.d2sigma[axis][k] = d2sig;
                g.d2s[axis][k] = (d2sig - 2.0 * dn * s1 - d2n * s) / n;
            }
        }
    }
    return g;
}

FieldTracker::FieldTracker(const Grid2D& grid, double mass, double epsilon_th) {
    const std::size_t n = grid.size();
    pol_.s.assign(n, Vec3{0.0, 0.0, 1.0});
    pol_.valid.assign(n, 0);
    pol_.epsilon_th = epsilon_th;
    mom_.pi_x.assign(n, 0.0);
    mom_.pi_y.assign(n, 0.0);
    mom_.w_x.assign(n, 0.0);
    mom_.w_y.assign(n, 0.0);
    mom_.valid.assign(n, 0);
    mom_.mass = mass;
}

FieldTracker::FieldTracker(const Grid2D& grid, double mass, double epsilon_th,
                           const InitialFieldSeeds& seeds)
    : FieldTracker(grid, mass, epsilon_th) {
    if (seeds.s.size() != grid.size()) throw std::invalid_argument("seed size mismatch");
    pol_.s = seeds.s;
    mom_.pi_x = seeds.pi_x;
    mom_.pi_y = seeds.pi_y;
    mom_.w_x = seeds.w_x;
    mom_.w_y = seeds.w_y;
}

void FieldTracker::update_polarization(const DensityAndSigma& ds) {
    const double eps = pol_.epsilon_th;
    for (std::size_t k = 0; k < ds.n.size(); ++k) {
        const double n = ds.n[k];
        if (n > eps && n > 0.0) {
            pol_.s[k] = ds.sigma[k] / n;
            pol_.valid[k] = 1;
        } else {
            pol_.valid[k] = 0;
        }
    }
}

void FieldTracker::update_momentum(const SpinorField& state, const DensityAndSigma& ds,
                                   const SpinorDerivatives& d) {
    const double eps = pol_.epsilon_th;
    for (std::size_t k = 0; k < ds.n.size(); ++k) {
        const double n = ds.n[k];
        if (!(n > eps && n > 0.0)) {
            mom_.valid[k] = 0;
            continue;
        }
        const cplx a = state.psi1[k];
        const cplx b = state.psi2[k];
        // Psi^dagger d_j Psi; Pi_j = -i hbar (Psi^dagger d_j Psi) / n
        const cplx px = std::conj(a) * d.dx[0][k] + std::conj(b) * d.dx[1][k];
        const cplx py = std::conj(a) * d.dy[0][k] + std::conj(b) * d.dy[1][k];
        mom_.pi_x[k] = units::hbar * px.imag() / n;
        mom_.pi_y[k] = units::hbar * py.imag() / n;
        mom_.w_x[k] = -units::hbar * px.real() / n;
        mom_.w_y[k] = -units::hbar * py.real() / n;
        mom_.valid[k] = 1;
    }
}

PolarizationField polarization(const DensityAndSigma& ds, double epsilon_th) {
    PolarizationField p;
    p.epsilon_th = epsilon_th;
    p.s.assign(ds.n.size(), Vec3{0.0, 0.0, 1.0});
    p.valid.assign(ds.n.size(), 0);
    for (std::size_t k = 0; k < ds.n.size(); ++k) {
        const double n = ds.n[k];
        if (n > epsilon_th && n > 0.0) {
            p.s[k] = ds.sigma[k] / n;
            p.valid[k] = 1;
        }
    }
    return p;
}

MomentumFields complex_momentum(const SpinorField& state, const DensityAndSigma& ds,
                                const SpinorDerivatives& d, double mass, double epsilon_th) {
    FieldTracker tracker(state.grid, mass, epsilon_th);
    tracker.update_momentum(state, ds, d);
    return tracker.momentum();
}

double GeometricTensor::curvature_xy() const { return -2.0 * units::hbar * q[1].imag(); }

GeometricTensor geometric_tensor_at(const Vec3& s, const Vec3& s_x, const Vec3& s_y) {
    GeometricTensor t;
    const double gxy = 0.25 * dot(s_x, s_y);
    const double fxy = 0.25 * dot(s, cross(s_x, s_y));
    t.q[0] = 0.25 * dot(s_x, s_x);
    t.q[1] = {gxy, fxy};
    t.q[2] = {gxy, -fxy};
    t.q[3] = 0.25 * dot(s_y, s_y);
    return t;
}

GeometricTensorField geometric_tensor(const PolarizationField& s, const SigmaGradients& g) {
    GeometricTensorField out;
    const std::size_t n = s.s.size();
    out.tensor.resize(n);
    out.valid = s.valid;
    for (std::size_t k = 0; k < n; ++k) {
        if (!s.valid[k]) continue;
        out.tensor[k] = geometric_tensor_at(s.s[k], g.ds[0][k], g.ds[1][k]);
    }
    return out;
}

AdiabaticPopulations adiabatic_populations(const ModelParams& p, const SpinorField& state) {
    const Grid2D& grid = state.grid;
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            const std::size_t k = grid.index(i, j);
            const cplx a = state.psi1[k];
            const cplx b = state.psi2[k];
            const double n = std::norm(a) + std::norm(b);
            const Vec3 field = electronic_hamiltonian(p, grid.point(i, j)).B;
            const double bn = norm(field);
            double proj = 0.0;  // b . Sigma
            if (bn > 0.0) {
                const cplx ab = std::conj(a) * b;
                const Vec3 sigma{2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)};
                proj = dot(field, sigma) / bn;
            }
            plus += 0.5 * (n + proj);
            minus += 0.5 * (n - proj);
        }
    }
    return {minus * grid.cell_area(), plus * grid.cell_area()};
}

}  // namespace geophase
