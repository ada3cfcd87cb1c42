#include "geophase/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace geophase {

namespace {

// The FFTW planner is not thread safe; execution of existing plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

struct SpectralOps::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

SpectralOps::SpectralOps(const Grid2D& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
    ComplexField scratch(grid.size());
    const int nx = static_cast<int>(grid.n_x());
    const int ny = static_cast<int>(grid.n_y());
    // FFTW_ESTIMATE keeps plan selection, and therefore results, reproducible run to run.
    std::lock_guard lock(planner_mutex());
    plans_->fwd = fftw_plan_dft_2d(nx, ny, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                   FFTW_FORWARD, FFTW_ESTIMATE);
    plans_->bwd = fftw_plan_dft_2d(nx, ny, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                   FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW planning failed");
}

SpectralOps::~SpectralOps() = default;
SpectralOps::SpectralOps(SpectralOps&&) noexcept = default;
SpectralOps& SpectralOps::operator=(SpectralOps&&) noexcept = default;

void SpectralOps::forward(ComplexField& field) const {
    if (field.size() != grid_.size()) throw std::invalid_argument("forward: size mismatch");
    fftw_execute_dft(plans_->fwd, as_fftw(field.data()), as_fftw(field.data()));
}

void SpectralOps::inverse(ComplexField& field) const {
    if (field.size() != grid_.size()) throw std::invalid_argument("inverse: size mismatch");
    fftw_execute_dft(plans_->bwd, as_fftw(field.data()), as_fftw(field.data()));
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (auto& v : field) v *= scale;
}

void SpectralOps::derivative_from_spectrum(const ComplexField& spectrum, Axis axis, int order,
                                           ComplexField& out) const {
    if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
    const std::size_t nx = grid_.n_x();
    const std::size_t ny = grid_.n_y();
    out.resize(spectrum.size());
    const auto& kx = grid_.kx();
    const auto& ky = grid_.ky();
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const bool nyquist = axis == Axis::X ? (i == nx / 2) : (j == ny / 2);
            const double k = axis == Axis::X ? kx[i] : ky[j];
            cplx factor;
            if (order == 1) {
                factor = nyquist ? cplx{} : cplx{0.0, k};
            } else {
                factor = -k * k;
            }
            const std::size_t idx = grid_.index(i, j);
            out[idx] = spectrum[idx] * factor;
        }
    }
    inverse(out);
}

ComplexField SpectralOps::derivative(const ComplexField& field, Axis axis, int order) const {
    ComplexField spectrum = field;
    forward(spectrum);
    ComplexField out(field.size());
    derivative_from_spectrum(spectrum, axis, order, out);
    return out;
}

ComplexField spectral_derivative(const SpectralOps& ops, const ComplexField& field, Axis axis,
                                 int order) {
    return ops.derivative(field, axis, order);
}

SpinorDerivatives spinor_derivatives(const SpectralOps& ops, const SpinorField& state,
                                     bool with_second) {
    SpinorDerivatives d;
    d.has_second = with_second;
    for (int c = 0; c < 2; ++c) {
        ComplexField spectrum = state.component(c);
        ops.forward(spectrum);
        ops.derivative_from_spectrum(spectrum, Axis::X, 1, d.dx[c]);
        ops.derivative_from_spectrum(spectrum, Axis::Y, 1, d.dy[c]);
        if (with_second) {
            ops.derivative_from_spectrum(spectrum, Axis::X, 2, d.dxx[c]);
            ops.derivative_from_spectrum(spectrum, Axis::Y, 2, d.dyy[c]);
        }
    }
    return d;
}

namespace {

Vec3 polarization_at(cplx a, cplx b, double n) {
    const cplx ab = std::conj(a) * b;
    return Vec3{2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)} / n;
}

}  // namespace

RoundTripReport fft_roundtrip_error(const SpectralOps& ops, const SpinorField& state,
                                    double min_density, std::size_t trips) {
    SpinorField after = state;
    for (std::size_t t = 0; t < trips; ++t) {
        for (int c = 0; c < 2; ++c) {
            ops.forward(after.component(c));
            ops.inverse(after.component(c));
        }
    }
    RoundTripReport report;
    report.trips = trips;
    const double floor = std::max(0.0, min_density);
    for (std::size_t k = 0; k < state.psi1.size(); ++k) {
        const double n = std::norm(state.psi1[k]) + std::norm(state.psi2[k]);
        if (!(n > 0.0)) continue;
        if (n <= floor) {
            ++report.excluded;
            continue;
        }
        const double n_after = std::norm(after.psi1[k]) + std::norm(after.psi2[k]);
        const Vec3 s = polarization_at(state.psi1[k], state.psi2[k], n);
        const Vec3 s_after = n_after > 0.0 ? polarization_at(after.psi1[k], after.psi2[k], n_after)
                                           : Vec3{};
        const Vec3 diff = s_after - s;
        report.samples.push_back({n, dot(diff, diff)});
    }
    return report;
}

}  // namespace geophase
