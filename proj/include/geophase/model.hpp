// model.hpp - linear E x e Jahn-Teller two-state model
//
// H_el(x) = A(x) 1 + B(x).sigma with
//   A(x) = M (omega_x^2 x^2 + omega_y^2 y^2) / 2,   B(x) = (kappa_x x, kappa_y y, 0).

#pragma once

#include <array>

#include "geophase/grid.hpp"
#include "geophase/units.hpp"

namespace geophase {

// Phase convention for the adiabatic spinors. CorrelatedMinus and SouthernPlus keep
// the second diabatic component real, (+-e^{-i beta}, 1)/sqrt2; NorthernPlus keeps the
// first component real, (1, +-e^{i beta})/sqrt2. beta is the azimuth of B(x).
enum class Gauge { CorrelatedMinus, NorthernPlus, SouthernPlus };
enum class InitKind { Correlated, Uncorrelated };
enum class Branch { Minus, Plus };

struct ModelParams {
    double mass_amu = 1.0;
    double omega_x = units::wavenumber_1000_in_au;
    double omega_y = units::wavenumber_1000_in_au;
    double kappa_x = 0.1;
    double kappa_y = 0.1;
    Gauge gauge = Gauge::CorrelatedMinus;
    InitKind init_kind = InitKind::Correlated;

    double mass() const { return mass_amu * units::amu_to_au; }
    // Throws std::invalid_argument on non-positive mass or frequencies.
    void validate() const;
};

struct ElectronicHamiltonianSample {
    double A = 0.0;
    Vec3 B;
    double gap() const { return 2.0 * norm(B); }
};

ElectronicHamiltonianSample electronic_hamiltonian(const ModelParams& p, Point2 x);

struct AdiabaticEnergies {
    double minus = 0.0;
    double plus = 0.0;
};
AdiabaticEnergies adiabatic_surfaces(const ModelParams& p, Point2 x);

// Azimuth of B(x); 0 at the seam.
double field_azimuth(const ModelParams& p, Point2 x);

struct AdiabaticSpinor {
    std::array<cplx, 2> u{};
    bool on_seam = false;  // B = 0: azimuth undefined, the beta = 0 limit is returned
};
AdiabaticSpinor adiabatic_spinor(const ModelParams& p, Point2 x, Branch branch, Gauge gauge);

// Berry connection A = i<u|grad u> of the adiabatic spinor in the given gauge;
// +grad(beta)/2 for the second-component-real family, -grad(beta)/2 otherwise.
Point2 analytic_connection(const ModelParams& p, Point2 x, Gauge gauge);

// Center x0 = -2 kappa_x / (M omega_x^2), y0 = 0.
Point2 initial_center(const ModelParams& p);
// Ground-state width sqrt(hbar / (2 M omega)) along x and y.
Point2 initial_width(const ModelParams& p);

// Psi_sigma = psi0(x) chi_sigma(x), discretely normalized. Throws
// std::invalid_argument when the Gaussian tail at the box edge exceeds machine epsilon.
SpinorField initial_state(const ModelParams& p, const Grid2D& grid);

// Exact fields of the initial state, used to seed values at grid nodes whose density
// is too small to be resolved numerically.
struct InitialFieldSeeds {
    Vec3Field s;
    RealField pi_x, pi_y;
    RealField w_x, w_y;
};
InitialFieldSeeds initial_field_seeds(const ModelParams& p, const Grid2D& grid);

}  // namespace geophase
