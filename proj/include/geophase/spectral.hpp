// spectral.hpp - FFTW-backed transforms and spectral derivatives on a Grid2D
//
// Normalization: forward is unnormalized, inverse carries 1/(n_x n_y), so one
// forward+inverse round trip is the identity.

#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "geophase/grid.hpp"

namespace geophase {

class SpectralOps {
public:
    explicit SpectralOps(const Grid2D& grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;
    SpectralOps(SpectralOps&&) noexcept;
    SpectralOps& operator=(SpectralOps&&) noexcept;

    const Grid2D& grid() const { return grid_; }

    // In place, on arrays of grid().size().
    void forward(ComplexField& field) const;
    void inverse(ComplexField& field) const;

    // d/dx or d^2/dx^2 (order 1 or 2) via multiplication by (ik)^order.
    // Odd derivatives zero the Nyquist mode.
    ComplexField derivative(const ComplexField& field, Axis axis, int order) const;

    // Applies (ik)^order to an already transformed field, writing into out (real space).
    void derivative_from_spectrum(const ComplexField& spectrum, Axis axis, int order,
                                  ComplexField& out) const;

private:
    Grid2D grid_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

ComplexField spectral_derivative(const SpectralOps& ops, const ComplexField& field, Axis axis,
                                 int order);

// First and second spatial derivatives of both spinor components.
struct SpinorDerivatives {
    ComplexField dx[2];
    ComplexField dy[2];
    ComplexField dxx[2];
    ComplexField dyy[2];
    bool has_second = false;
};

SpinorDerivatives spinor_derivatives(const SpectralOps& ops, const SpinorField& state,
                                     bool with_second);

struct RoundTripSample {
    double density = 0.0;
    double squared_error = 0.0;
};

struct RoundTripReport {
    std::vector<RoundTripSample> samples;
    std::size_t excluded = 0;  // points with 0 < n <= min_density
    std::size_t trips = 1;
};

// Forward+inverse transform applied `trips` times; compares the polarization
// s = Sigma/n before and after at every point with n > min_density (and n > 0).
RoundTripReport fft_roundtrip_error(const SpectralOps& ops, const SpinorField& state,
                                    double min_density = 0.0, std::size_t trips = 1);

}  // namespace geophase
