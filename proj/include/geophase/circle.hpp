// circle.hpp - spinor values and derivatives on a circle, free of interpolation error
//
// The grid state is a trigonometric polynomial, so its restriction to a circle of radius R
// is band-limited in angle (|m| <~ k_max R). Jets are evaluated exactly from the Fourier
// series at enough equispaced angles to carry that band, then resampled in angle by
// zero-padded FFT to any number of points.

#pragma once

#include <array>
#include <vector>

#include "geophase/geometry.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

struct CircleJets {
    Point2 center;
    double radius = 0.0;
    std::vector<Point2> points;  // angle 2 pi i / n, counter-clockwise
    std::array<std::vector<cplx>, 2> value, dx, dy, dxx, dyy;
    bool has_derivatives = false;

    std::size_t size() const { return points.size(); }
};

// Exact-evaluation angle count: power of two >= 2 (k_diag R + 32).
std::size_t circle_band_samples(const Grid2D& grid, double radius);

// Fourier coefficients of both components (scaled so that the inverse sum is unnormalized).
struct SpinorSpectrum {
    Grid2D grid;
    ComplexField c1, c2;
};
SpinorSpectrum spinor_spectrum(const SpectralOps& ops, const SpinorField& state);

// Pointwise evaluation of the Fourier series; odd derivatives omit the Nyquist modes as
// the spectral derivative does.
CircleJets spinor_jets_at(const SpinorSpectrum& spec, const std::vector<Point2>& points,
                          bool with_derivatives);

// Exact jets of one circle at its band-limit count, resampled in angle on demand.
class CircleSeries {
public:
    CircleSeries(const SpinorSpectrum& spec, Point2 center, double radius, bool with_derivatives);

    std::size_t band() const { return coarse_.size(); }
    // n_points must be at least band().
    CircleJets at(std::size_t n_points) const;
    // Largest angle between the polarizations of neighbouring points at n_points; pairs
    // where either density is at or below min_density are skipped.
    double max_turn(std::size_t n_points, double min_density = 0.0) const;

private:
    CircleJets coarse_;
};

// n_points must be at least circle_band_samples(grid, radius).
CircleJets circle_jets(const SpinorSpectrum& spec, Point2 center, double radius,
                       std::size_t n_points, bool with_derivatives);

// Open-path decomposition with the spinor and its gradient evaluated exactly. Segments of
// the path polyline are bisected until the phase changes by at most max_step (rad) across
// each, which resolves near-nodes that pass between path points.
OpenPathPhases open_path_phases(const SpinorSpectrum& spec, const LoopPath& path,
                                double max_step = 1e-3);

// s-formula on the jets; coverage counts points with n > epsilon_th.
PhaseRecord circle_phase(const CircleJets& jets, const BlochLoopOptions& opt = {},
                         double epsilon_th = default_epsilon_th);

}  // namespace geophase
