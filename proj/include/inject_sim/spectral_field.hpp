#pragma once

/**
 * @file spectral_field.hpp
 * @brief Scalar fields on a uniform square grid with homogeneous Dirichlet
 *        pseudo-spectral operators.
 *
 * Only interior nodes are stored: node (ix, iy) sits at
 * ((ix+1) dx, (iy+1) dx) with dx = D/(n+1). The boundary value is
 * identically zero and never stored. Values are row-major with iy the
 * slow index.
 *
 * The transforms use the sine basis phi_km(x,y) = sin(k pi x/D) sin(m pi y/D),
 * k, m = 1..n, which is exactly orthogonal on the interior nodes (DST-I).
 * Coefficients are amplitudes: a field equal to phi_11 has coefficient 1
 * at mode (1,1) and 0 elsewhere.
 */

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace inject {

struct Region;

struct Grid2D {
    int n = 0;          ///< interior nodes per side
    double length = 0;  ///< domain side [km]

    Grid2D() = default;
    Grid2D(int n_nodes, double side_km);

    double dx() const { return length / (n + 1); }
    std::size_t size() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * n + ix; }
    double coord(int i) const { return (i + 1) * dx(); }
    /// Nearest interior node to a coordinate (ties resolve upward), clamped to [0, n-1].
    int nearest_index(double x_km) const;

    bool operator==(const Grid2D&) const = default;
};

class ScalarField2D {
public:
    ScalarField2D() = default;
    explicit ScalarField2D(const Grid2D& grid, double fill = 0.0);
    ScalarField2D(const Grid2D& grid, std::vector<double> values);

    const Grid2D& grid() const { return grid_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& at(int ix, int iy) { return values_[grid_.index(ix, iy)]; }
    double at(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }
    std::size_t size() const { return values_.size(); }

    bool all_finite() const;
    double max_abs() const;

    /// this += a * other
    void add_scaled(const ScalarField2D& other, double a);

private:
    Grid2D grid_;
    std::vector<double> values_;
};

/// Sample sin(k pi x/D) sin(m pi y/D) on the interior nodes.
ScalarField2D sine_mode(const Grid2D& grid, int k, int m);

/// Eigenvalue of -Laplacian for sine mode (k, m) [1/km^2].
double sine_eigenvalue(const Grid2D& grid, int k, int m);

/// Precomputed eigenvalues and transform plans. Not shareable across
/// threads; each simulation owns one.
class SpectralWorkspace {
public:
    explicit SpectralWorkspace(const Grid2D& grid);
    ~SpectralWorkspace();
    SpectralWorkspace(SpectralWorkspace&&) noexcept;
    SpectralWorkspace& operator=(SpectralWorkspace&&) noexcept;
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    const Grid2D& grid() const;
    /// lambda_{k,m} stored at index (m-1)*n + (k-1).
    std::span<const double> eigenvalues() const;
    double max_eigenvalue() const;

    /// Unnormalised DST-I in both directions, in -> out (sizes n*n).
    void dst2(std::span<const double> in, std::span<double> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Amplitude coefficients, same layout as the eigenvalues.
std::vector<double> sine_transform_forward(const ScalarField2D& field, SpectralWorkspace& ws);
ScalarField2D sine_transform_inverse(std::span<const double> coeffs, SpectralWorkspace& ws);

/// Spectral Laplacian with homogeneous Dirichlet boundary [field units/km^2].
ScalarField2D laplacian(const ScalarField2D& field, SpectralWorkspace& ws);

/// Weighted sum over region cells of value * dx * dy * d_z [field units * km^3].
double region_volume_integral(const ScalarField2D& field, const Region& region, double d_z);

}  // namespace inject
