// fields.hpp - gauge-invariant hydrodynamic fields extracted from a spinor state
//
// density n = |Psi1|^2 + |Psi2|^2, Sigma = Psi^dagger sigma Psi, polarization s = Sigma/n,
// complex momentum Pi_j = Psi^dagger(-i d_j)Psi / n = pi_j + i w_j.
//
// Grid nodes with n <= epsilon_th are "invalid": extracted values there keep whatever
// the field held before (frozen), they are never replaced by NaN.

#pragma once

#include <array>
#include <optional>

#include "geophase/model.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

inline constexpr double default_epsilon_th = 1e-20;

struct DensityAndSigma {
    RealField n;
    Vec3Field sigma;
};

DensityAndSigma sigma_and_density(const SpinorField& state);

struct PolarizationField {
    Vec3Field s;
    Mask valid;
    double epsilon_th = default_epsilon_th;

    std::size_t valid_count() const;
};

// Spatial derivatives of n, Sigma and s, built from spectral derivatives of the
// spinor components by the product and quotient rules. Entries are meaningful where
// n > 0; second derivatives only when requested.
struct SigmaGradients {
    RealField dn[2];
    RealField d2n[2];
    Vec3Field dsigma[2];
    Vec3Field d2sigma[2];
    Vec3Field ds[2];
    Vec3Field d2s[2];
    bool has_second = false;
};

SigmaGradients sigma_gradients(const SpinorField& state, const DensityAndSigma& ds,
                               const SpinorDerivatives& d);

struct MomentumFields {
    RealField pi_x, pi_y;
    RealField w_x, w_y;
    Mask valid;
    double mass = 1.0;

    double v_x(std::size_t k) const { return pi_x[k] / mass; }
    double v_y(std::size_t k) const { return pi_y[k] / mass; }
};

// Tracks s, pi and w across time with the frozen-value policy. Construct from seed
// values (typically initial_field_seeds) or let the first update fill everything.
class FieldTracker {
public:
    FieldTracker(const Grid2D& grid, double mass, double epsilon_th);
    FieldTracker(const Grid2D& grid, double mass, double epsilon_th, const InitialFieldSeeds& seeds);

    // Updates s from the state wherever n > epsilon_th.
    void update_polarization(const DensityAndSigma& ds);
    // Updates pi and w from the state wherever n > epsilon_th.
    void update_momentum(const SpinorField& state, const DensityAndSigma& ds,
                         const SpinorDerivatives& d);

    const PolarizationField& polarization() const { return pol_; }
    const MomentumFields& momentum() const { return mom_; }
    PolarizationField& polarization() { return pol_; }
    MomentumFields& momentum() { return mom_; }
    double epsilon_th() const { return pol_.epsilon_th; }

private:
    PolarizationField pol_;
    MomentumFields mom_;
};

// One-shot extractions (no history). Invalid nodes get s = (0,0,1) and pi = w = 0.
PolarizationField polarization(const DensityAndSigma& ds, double epsilon_th = default_epsilon_th);
MomentumFields complex_momentum(const SpinorField& state, const DensityAndSigma& ds,
                                const SpinorDerivatives& d, double mass,
                                double epsilon_th = default_epsilon_th);

// q_kj = (s_k.s_j + i s.(s_k x s_j)) / 4,  g = Re q,  curvature B_kj = -2 hbar Im q_kj.
struct GeometricTensor {
    std::array<cplx, 4> q{};  // (xx, xy, yx, yy)
    std::array<double, 4> metric() const {
        return {q[0].real(), q[1].real(), q[2].real(), q[3].real()};
    }
    double curvature_xy() const;
};

GeometricTensor geometric_tensor_at(const Vec3& s, const Vec3& s_x, const Vec3& s_y);

struct GeometricTensorField {
    std::vector<GeometricTensor> tensor;
    Mask valid;
};

GeometricTensorField geometric_tensor(const PolarizationField& s, const SigmaGradients& g);

struct AdiabaticPopulations {
    double minus = 0.0;
    double plus = 0.0;
};

// P_+- = sum n (1 +- b.s)/2 dx dy = sum (n +- b.Sigma)/2 dx dy; seam nodes contribute n/2.
AdiabaticPopulations adiabatic_populations(const ModelParams& p, const SpinorField& state);

}  // namespace geophase
