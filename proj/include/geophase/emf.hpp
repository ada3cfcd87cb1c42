// emf.hpp - electromotive-force fields, loop circulations and the polarization EOM check
//
//   f_nbo = B / hbar
//   f_el  = -1/(2 M n) sum_j ( w_j d_j Sigma + (hbar/2) d_j^2 Sigma )
//   f_mag = -1/(2 M n) ( s x sum_j pi_j d_j Sigma )
//
// and -dGamma_O/dt = sum_X sum_i f^X(x_i) . ds_i on a fixed closed loop. The increment
// ds_i = (s_{i+1} - s_{i-1})/2 is projected onto the tangent plane at s_i; the two forms
// differ only along s, so both give the same circulations.

#pragma once

#include "geophase/circle.hpp"
#include "geophase/fields.hpp"
#include "geophase/geometry.hpp"
#include "geophase/propagator.hpp"

namespace geophase {

enum class EmfForm {
    Reduced,  // the fields above
    Full      // f_el = tau/2 - (hbar/4M) sum_j d_j^2 s,  f_mag = (nu x s)/2
};

struct EmfFields {
    Vec3Field f_nbo;
    Vec3Field f_el;
    Vec3Field f_mag;
    Mask valid;
};

// Requires gradients with second derivatives. Invalid nodes keep the values of `previous`
// when given, zero otherwise.
EmfFields emf_fields(const ModelParams& p, const Grid2D& grid, const DensityAndSigma& ds,
                     const SigmaGradients& g, const PolarizationField& s, const MomentumFields& m,
                     EmfForm form = EmfForm::Reduced, const EmfFields* previous = nullptr);

struct EmfBreakdown {
    double time = 0.0;
    int path_id = 0;
    double e_nbo = 0.0;
    double e_el = 0.0;
    double e_mag = 0.0;
    double e_total = 0.0;
    double fd_rate = 0.0;  // filled by the caller from neighbouring phase samples
    double coverage = 1.0;
    bool unreliable = false;  // coverage < 1
    std::size_t loop_points = 0;
    bool resolved = true;  // Bloch image resolved at loop_points (circle_emf_balance)
};

EmfBreakdown emf_circulations(const EmfFields& f, const PolarizationField& s,
                              const Grid2D& grid, const LoopPath& path);

// Same breakdown from exact spinor jets on a circle (no field interpolation). Coverage
// counts points with n > epsilon_th.
EmfBreakdown circle_emf(const ModelParams& p, const CircleJets& jets,
                        EmfForm form = EmfForm::Reduced, double epsilon_th = default_epsilon_th);

struct CircleEmfOptions {
    std::size_t min_points = 8192;
    std::size_t max_points = std::size_t{1} << 20;
    // Largest allowed angle between the polarizations of neighbouring loop points.
    double max_turn = 0.02;
    EmfForm form = EmfForm::Reduced;
    double epsilon_th = default_epsilon_th;
    BlochLoopOptions loop;
};

// EMF breakdown of `now` on a circle with fd_rate = -(G(after) - G(before)) / 2h, the phase
// difference reduced to (-pi, pi]. All three states use the smallest power-of-two point count
// >= min_points at which every Bloch image meets max_turn where n > epsilon_th (capped at
// max_points, in which case `resolved` is false).
EmfBreakdown circle_emf_balance(const ModelParams& p, const SpectralOps& ops,
                                const SpinorField& before, const SpinorField& now,
                                const SpinorField& after, double half_span, Point2 center,
                                double radius, const CircleEmfOptions& opt = {});

struct EomResidual {
    Vec3Field residual;
    Vec3Field s;      // polarization at t
    Vec3Field s_dot;  // material derivative from the snapshots
    RealField omega;  // 2|B|/hbar
    Mask valid;
};

// s_dot = (s(t+h) - s(t-h))/(2h) + v.grad s, compared with
// (Omega b + tau) x s - (hbar/2M) sum_j d_j(s_j x s). All fields are taken at t.
EomResidual polarization_eom_residual(const ModelParams& p, const SpinorField& before,
                                      const SpinorField& now, const SpinorField& after,
                                      double half_span, const SpectralOps& ops,
                                      double epsilon_th = default_epsilon_th);

// Builds the t +- h snapshots by propagating `now` with step h both ways.
EomResidual polarization_eom_residual(const ModelParams& p, const SpinorField& now, double h,
                                      double epsilon_th = default_epsilon_th);

struct EomSummary {
    double median_relative = 0.0;  // median |r| / (|s_dot| + Omega)
    double max_orthogonality = 0.0;  // max |r.s|
    std::size_t valid_points = 0;
};
EomSummary summarize(const EomResidual& r);

}  // namespace geophase
