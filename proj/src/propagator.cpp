#include "geophase/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace geophase {

void PropagatorConfig::validate(const ModelParams& p, const Grid2D& grid) const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (callback_every == 0) throw std::invalid_argument("callback cadence must be >= 1");
    double max_b = 0.0;
    for (std::size_t i : {std::size_t{0}, grid.n_x() - 1}) {
        for (std::size_t j : {std::size_t{0}, grid.n_y() - 1}) {
            max_b = std::max(max_b, norm(electronic_hamiltonian(p, grid.point(i, j)).B));
        }
    }
    if (dt * max_b / units::hbar >= 0.25 * std::numbers::pi) {
        std::ostringstream os;
        os << "dt = " << dt << " under-resolves the Larmor precession (dt*max|B| = " << dt * max_b
           << " >= pi/4)";
        throw std::invalid_argument(os.str());
    }
}

Matrix2 potential_propagator(const ElectronicHamiltonianSample& h, double dt_eff) {
    const cplx phase = std::polar(1.0, -h.A * dt_eff / units::hbar);
    const double b = norm(h.B);
    if (b == 0.0) return {phase, cplx{}, cplx{}, phase};
    const double angle = b * dt_eff / units::hbar;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Vec3 u = h.B / b;
    const cplx i{0.0, 1.0};
    // cos 1 - i sin (b.sigma), b.sigma = [[bz, bx - i by], [bx + i by, -bz]]
    return {phase * (c - i * s * u.z), phase * (-i * s * cplx{u.x, -u.y}),
            phase * (-i * s * cplx{u.x, u.y}), phase * (c + i * s * u.z)};
}

namespace {

void apply_matrix(const Matrix2& u, cplx& a, cplx& b) {
    const cplx na = u[0] * a + u[1] * b;
    const cplx nb = u[2] * a + u[3] * b;
    a = na;
    b = nb;
}

ComplexField kinetic_factor(const Grid2D& grid, double mass, double dt_eff) {
    ComplexField f(grid.size());
    const auto& kx = grid.kx();
    const auto& ky = grid.ky();
    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            const double k2 = kx[i] * kx[i] + ky[j] * ky[j];
            f[grid.index(i, j)] = std::polar(1.0, -units::hbar * k2 * dt_eff / (2.0 * mass));
        }
    }
    return f;
}

void multiply_in_fourier_space(const SpectralOps& ops, SpinorField& state,
                               const ComplexField& factor) {
    for (int c = 0; c < 2; ++c) {
        auto& comp = state.component(c);
        ops.forward(comp);
        for (std::size_t k = 0; k < comp.size(); ++k) comp[k] *= factor[k];
        ops.inverse(comp);
    }
}

}  // namespace

void potential_step(const ModelParams& p, SpinorField& state, double dt_eff) {
    const Grid2D& g = state.grid;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const std::size_t k = g.index(i, j);
            const Matrix2 u = potential_propagator(electronic_hamiltonian(p, g.point(i, j)), dt_eff);
            apply_matrix(u, state.psi1[k], state.psi2[k]);
        }
    }
}

void kinetic_step(const SpectralOps& ops, double mass, SpinorField& state, double dt_eff) {
    multiply_in_fourier_space(ops, state, kinetic_factor(state.grid, mass, dt_eff));
}

Observables observables(const SpectralOps& ops, const ModelParams& p, const SpinorField& state) {
    const Grid2D& g = state.grid;
    const double m = p.mass();
    Observables o;
    o.norm = norm_squared(state);

    double kin = 0.0;
    const auto& kx = g.kx();
    const auto& ky = g.ky();
    for (int c = 0; c < 2; ++c) {
        ComplexField spectrum = state.component(c);
        ops.forward(spectrum);
        for (std::size_t i = 0; i < g.n_x(); ++i) {
            for (std::size_t j = 0; j < g.n_y(); ++j) {
                const double k2 = kx[i] * kx[i] + ky[j] * ky[j];
                kin += std::norm(spectrum[g.index(i, j)]) * k2;
            }
        }
    }
    // Parseval: sum |psi|^2 dA = (dA / N) sum |psi_k|^2
    kin *= units::hbar * units::hbar / (2.0 * m) * g.cell_area() / static_cast<double>(g.size());

    double pot = 0.0;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
        for (std::size_t j = 0; j < g.n_y(); ++j) {
            const std::size_t k = g.index(i, j);
            const auto h = electronic_hamiltonian(p, g.point(i, j));
            const cplx a = state.psi1[k];
            const cplx b = state.psi2[k];
            const cplx ab = std::conj(a) * b;
            pot += h.A * (std::norm(a) + std::norm(b)) + 2.0 * h.B.x * ab.real() +
                   2.0 * h.B.y * ab.imag() + h.B.z * (std::norm(a) - std::norm(b));
        }
    }
    pot *= g.cell_area();

    o.kinetic = kin / o.norm;
    o.potential = pot / o.norm;
    o.energy = o.kinetic + o.potential;
    return o;
}

double edge_density(const SpinorField& state) {
    const Grid2D& g = state.grid;
    double m = 0.0;
    auto visit = [&](std::size_t i, std::size_t j) {
        const std::size_t k = g.index(i, j);
        m = std::max(m, std::norm(state.psi1[k]) + std::norm(state.psi2[k]));
    };
    for (std::size_t i = 0; i < g.n_x(); ++i) {
        visit(i, 0);
        visit(i, g.n_y() - 1);
    }
    for (std::size_t j = 0; j < g.n_y(); ++j) {
        visit(0, j);
        visit(g.n_x() - 1, j);
    }
    return m;
}

SplitOperator::SplitOperator(const ModelParams& params, const Grid2D& grid, double dt)
    : params_(params), dt_(dt), ops_(grid) {
    params_.validate();
    if (!(dt > 0.0) && !(dt < 0.0)) throw std::invalid_argument("dt must be non-zero");
    potential_.resize(grid.size());
    for (std::size_t i = 0; i < grid.n_x(); ++i) {
        for (std::size_t j = 0; j < grid.n_y(); ++j) {
            potential_[grid.index(i, j)] =
                potential_propagator(electronic_hamiltonian(params_, grid.point(i, j)), dt);
        }
    }
    half_kinetic_ = kinetic_factor(grid, params_.mass(), 0.5 * dt);
    full_kinetic_ = kinetic_factor(grid, params_.mass(), dt);
}

void SplitOperator::apply_potential(SpinorField& state) const {
    for (std::size_t k = 0; k < potential_.size(); ++k) {
        apply_matrix(potential_[k], state.psi1[k], state.psi2[k]);
    }
}

void SplitOperator::apply_kinetic(SpinorField& state, const ComplexField& factor) const {
    multiply_in_fourier_space(ops_, state, factor);
}

double SplitOperator::check_norm(const SpinorField& state, double before) const {
    const double after = norm_squared(state);
    if (!std::isfinite(after)) throw NumericalAbort("non-finite wavefunction after propagation");
    const double drift = std::abs(after - before) / before;
    if (drift > max_norm_drift) {
        std::ostringstream os;
        os << "norm drift " << drift << " in one step exceeds tolerance (grid or box violation?)";
        throw NumericalAbort(os.str());
    }
    return after;
}

void SplitOperator::step(SpinorField& state) const {
    if (!(state.grid == ops_.grid())) throw std::invalid_argument("step: grid mismatch");
    const double before = norm_squared(state);
    apply_kinetic(state, half_kinetic_);
    apply_potential(state);
    apply_kinetic(state, half_kinetic_);
    check_norm(state, before);
}

void SplitOperator::advance(SpinorField& state, std::size_t n_steps) const {
    if (n_steps == 0) return;
    if (!(state.grid == ops_.grid())) throw std::invalid_argument("advance: grid mismatch");
    double previous = norm_squared(state);
    apply_kinetic(state, half_kinetic_);
    apply_potential(state);
    for (std::size_t s = 1; s < n_steps; ++s) {
        // Kinetic and potential factors are unitary; the norm seen in real space
        // must move only by rounding from one step to the next.
        previous = check_norm(state, previous);
        apply_kinetic(state, full_kinetic_);
        apply_potential(state);
    }
    apply_kinetic(state, half_kinetic_);
    check_norm(state, previous);
}

}  // namespace geophase
