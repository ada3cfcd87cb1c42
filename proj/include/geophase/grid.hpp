// grid.hpp - uniform periodic 2D grid, small vector types and field containers
//
// Layout: all grid fields are row-major with x as the slow index,
//   idx = i * n_y + j,  x_i = -length_x/2 + i*dx,  y_j = -length_y/2 + j*dy.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <new>
#include <vector>

namespace geophase {

using cplx = std::complex<double>;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Allocator returning 64-byte aligned storage so FFTW can use its SIMD kernels
// on field arrays directly.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) { return true; }
};

using ComplexField = std::vector<cplx, AlignedAllocator<cplx>>;
using RealField = std::vector<double>;
using Vec3Field = std::vector<Vec3>;
using Mask = std::vector<unsigned char>;

enum class Axis { X, Y };

class Grid2D {
public:
    Grid2D() = default;
    // Throws std::invalid_argument unless both sizes are powers of two and lengths positive.
    Grid2D(std::size_t n_x, std::size_t n_y, double length_x, double length_y);
    static Grid2D square(std::size_t n, double length) { return Grid2D(n, n, length, length); }

    std::size_t n_x() const { return n_x_; }
    std::size_t n_y() const { return n_y_; }
    std::size_t size() const { return n_x_ * n_y_; }
    double length_x() const { return length_x_; }
    double length_y() const { return length_y_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double cell_area() const { return dx_ * dy_; }

    std::size_t index(std::size_t i, std::size_t j) const { return i * n_y_ + j; }
    double x(std::size_t i) const { return -0.5 * length_x_ + static_cast<double>(i) * dx_; }
    double y(std::size_t j) const { return -0.5 * length_y_ + static_cast<double>(j) * dy_; }
    Point2 point(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }

    // Angular wavenumbers in standard FFT ordering (0, 1, ..., n/2-1, -n/2, ..., -1) * 2pi/L.
    const std::vector<double>& kx() const { return kx_; }
    const std::vector<double>& ky() const { return ky_; }

    // True for grid nodes on the outermost ring of the box.
    bool on_edge(std::size_t i, std::size_t j) const {
        return i == 0 || j == 0 || i + 1 == n_x_ || j + 1 == n_y_;
    }

    friend bool operator==(const Grid2D& a, const Grid2D& b) {
        return a.n_x_ == b.n_x_ && a.n_y_ == b.n_y_ && a.length_x_ == b.length_x_ &&
               a.length_y_ == b.length_y_;
    }

private:
    std::size_t n_x_ = 0;
    std::size_t n_y_ = 0;
    double length_x_ = 0.0;
    double length_y_ = 0.0;
    double dx_ = 0.0;
    double dy_ = 0.0;
    std::vector<double> kx_;
    std::vector<double> ky_;
};

// Two-component diabatic wavefunction sampled on a grid.
struct SpinorField {
    Grid2D grid;
    ComplexField psi1;
    ComplexField psi2;

    SpinorField() = default;
    explicit SpinorField(const Grid2D& g) : grid(g), psi1(g.size()), psi2(g.size()) {}

    ComplexField& component(int c) { return c == 0 ? psi1 : psi2; }
    const ComplexField& component(int c) const { return c == 0 ? psi1 : psi2; }
};

// Discrete L2 norm squared: sum |psi|^2 dx dy.
double norm_squared(const SpinorField& state);
void normalize(SpinorField& state);
// sqrt(sum |a-b|^2 dx dy)
double distance(const SpinorField& a, const SpinorField& b);

}  // namespace geophase
