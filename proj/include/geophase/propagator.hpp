// propagator.hpp - Strang split-operator propagation of the two-state spinor
//
// One step = half kinetic, full potential, half kinetic. The potential factor is the
// exact 2x2 exponential
//   U(x) = e^{-i A dt} [cos(|B| dt) 1 - i sin(|B| dt) b.sigma],
// the kinetic factor e^{-i k^2 dt / 2M} is applied per component in Fourier space.

#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "geophase/model.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

struct PropagatorConfig {
    double dt = 0.25;
    std::size_t n_steps = 0;
    std::size_t callback_every = 1;
    double max_norm_drift_per_step = 1e-8;
    double max_edge_density = 1e-14;

    // Throws std::invalid_argument when dt <= 0 or dt * max|B| >= pi/4 on the grid.
    void validate(const ModelParams& p, const Grid2D& grid) const;
};

// Raised when a run must stop for numerical reasons (norm drift, NaN, box leak).
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-node 2x2 propagator matrix, row-major (u00, u01, u10, u11).
using Matrix2 = std::array<cplx, 4>;

Matrix2 potential_propagator(const ElectronicHamiltonianSample& h, double dt_eff);

void potential_step(const ModelParams& p, SpinorField& state, double dt_eff);
void kinetic_step(const SpectralOps& ops, double mass, SpinorField& state, double dt_eff);

struct Observables {
    double norm = 0.0;
    double energy = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
};

Observables observables(const SpectralOps& ops, const ModelParams& p, const SpinorField& state);

// Maximum density over the outermost ring of grid nodes.
double edge_density(const SpinorField& state);

class SplitOperator {
public:
    SplitOperator(const ModelParams& params, const Grid2D& grid, double dt);

    double dt() const { return dt_; }
    const ModelParams& params() const { return params_; }
    const SpectralOps& ops() const { return ops_; }

    // One Strang step; throws NumericalAbort if the norm moves by more than
    // max_norm_drift (relative) or becomes non-finite.
    void step(SpinorField& state) const;

    // n Strang steps with the inner half-kinetic factors merged.
    void advance(SpinorField& state, std::size_t n_steps) const;

    double max_norm_drift = 1e-8;

private:
    void apply_potential(SpinorField& state) const;
    void apply_kinetic(SpinorField& state, const ComplexField& factor) const;
    double check_norm(const SpinorField& state, double before) const;

    ModelParams params_;
    double dt_;
    SpectralOps ops_;
    std::vector<Matrix2> potential_;
    ComplexField half_kinetic_;
    ComplexField full_kinetic_;
};

}  // namespace geophase
