// geometry.hpp - probe paths and phase functionals
//
// Two routes to the closed-loop phase:
//   s-formula:   Gamma_O = -1/2 sum_i (s_x ds_y - s_y ds_x)_i / (1 + s_z,i)
//                with ds_i = (s_{i+1} - s_{i-1})/2 (monopole connection, south-pole string);
//   momentum:    Gamma   = -(1/hbar) int pi . dl, either trapezoidal on the sampled pi
//                field or segment-wise as -sum_i arg Psi_i^dagger Psi_{i+1}; the latter stays
//                exact across nodal points where pi diverges.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geophase/fields.hpp"
#include "geophase/model.hpp"

namespace geophase {

enum class Sampling { GridSnapped, Bilinear };
enum class PhaseMethod { SFormula, MomentumCirculation };

class PathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a functional that requires every path sample to be valid meets an
// invalid one; carries the fraction of valid samples.
class PathCoverageError : public PathError {
public:
    PathCoverageError(const std::string& what, double coverage)
        : PathError(what), coverage(coverage) {}
    double coverage;
};

struct LoopPath {
    std::vector<Point2> points;
    bool closed = true;
    Sampling sampling = Sampling::Bilinear;

    std::size_t n_points() const { return points.size(); }
    double max_spacing() const;
    double length() const;
};

LoopPath make_circle(const Grid2D& grid, double radius, std::size_t n_points, Sampling sampling,
                     Point2 center = {});
// Open arc from angle phi_begin to phi_end (radians, either direction).
LoopPath make_arc(const Grid2D& grid, Point2 center, double radius, double phi_begin,
                  double phi_end, std::size_t n_points, Sampling sampling);
LoopPath reversed(const LoopPath& path);
// Splits segments longer than max_spacing by inserting evenly spaced points.
LoopPath refined(const LoopPath& path, double max_spacing);
// Throws PathError if consecutive points are more than 2 max(dx, dy) apart.
void check_resolution(const LoopPath& path, const Grid2D& grid);

// Field sampling at path points: exact node values for GridSnapped paths, bilinear
// (periodic) interpolation otherwise.
std::vector<Vec3> sample(const Grid2D& grid, const Vec3Field& f, const LoopPath& path);
std::vector<double> sample(const Grid2D& grid, const RealField& f, const LoopPath& path);
std::vector<cplx> sample(const Grid2D& grid, const ComplexField& f, const LoopPath& path);
// Fraction of path points whose interpolation stencil is entirely valid.
double coverage(const Grid2D& grid, const Mask& valid, const LoopPath& path);

struct PhaseRecord {
    double time = 0.0;
    double gamma = 0.0;
    PhaseMethod method = PhaseMethod::SFormula;
    int path_id = 0;
    double coverage = 1.0;
    bool flagged = false;  // coverage < 1
};

struct BlochLoopOptions {
    double pole_delta = 0.05;
};

struct BlochLoopPhase {
    double gamma = 0.0;
    bool rotated = false;
    Vec3 north;  // direction used as the north pole (e3 unless rotated)
};

// The s-formula on an ordered closed sequence of unit vectors. Rotates the frame when the
// image comes within pole_delta of the south pole; throws PathError if no pole-free
// orientation exists.
BlochLoopPhase bloch_loop_phase(std::span<const Vec3> s, const BlochLoopOptions& opt = {});

PhaseRecord loop_phase_from_s(const PolarizationField& s, const Grid2D& grid,
                              const LoopPath& path, bool require_full_coverage = true,
                              const BlochLoopOptions& opt = {});

PhaseRecord path_phase_from_momentum(const MomentumFields& m, const Grid2D& grid,
                                     const LoopPath& path, bool require_full_coverage = false);

// Same functional from phase increments of the spinor between neighbouring samples.
// Coverage is reported against `valid` (typically the momentum mask).
PhaseRecord path_phase_from_increments(const SpinorField& state, const Mask& valid,
                                       const LoopPath& path);

struct OpenPathPhases {
    double gamma = 0.0;     // -(1/hbar) int pi.dl
    double theta_ba = 0.0;  // arg Psi(x_a)^dagger Psi(x_b)
    double gamma_el = 0.0;  // arg<u_a|u_b> - sum_i arg<u_i|u_{i+1}>
    // (-theta_ba + gamma_el - gamma) reduced to (-pi, pi]
    double identity_residual() const;
};

OpenPathPhases open_path_decomposition(const SpinorField& state, const MomentumFields& m,
                                       const LoopPath& path);

struct QuantizationResult {
    long integer = 0;
    double value = 0.0;  // circulation / (2 pi hbar)
    double residual = 0.0;
    bool flagged = false;  // residual > 0.05
};

// round( closed-loop int (pi + hbar A).dl / (2 pi hbar) ) with the analytic connection
// of the given gauge.
QuantizationResult quantization_integer(const ModelParams& p, const MomentumFields& m,
                                        const Grid2D& grid, Gauge gauge, const LoopPath& path);

struct AdvectResult {
    LoopPath path;
    std::vector<std::size_t> frozen;  // indices whose velocity stencil was invalid
};

// Midpoint rule x <- x + dt v(x + dt v(x)/2), v = pi/M bilinearly interpolated.
AdvectResult advect_path(const LoopPath& path, const MomentumFields& m, const Grid2D& grid,
                         double dt);

// Returns the 2pi branch of `value` nearest to `previous`.
double unwrap_near(double value, double previous);
// Reduces to (-pi, pi].
double wrap_pi(double value);

// Synthetic constant-latitude image: s(phi) = (sin t cos phi, sin t sin phi, cos t).
std::vector<Vec3> constant_latitude_image(double theta, std::size_t n_points);
// -2 pi sin^2(theta/2)
double constant_latitude_phase(double theta);

}  // namespace geophase
