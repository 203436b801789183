#include "inject_sim/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "inject_sim/errors.hpp"
#include "inject_sim/region.hpp"

namespace inject {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void check_same_grid(const Grid2D& a, const Grid2D& b) {
    if (!(a == b)) {
        throw ConfigError("field shape mismatch");
    }
}

}  // namespace

Grid2D::Grid2D(int n_nodes, double side_km) : n(n_nodes), length(side_km) {
    if (n < 2) {
        throw ConfigError("grid: n must be >= 2");
    }
    if (!(length > 0.0)) {
        throw ConfigError("grid: side length must be > 0");
    }
}

int Grid2D::nearest_index(double x_km) const {
    const long k = std::lround(x_km * (n + 1) / length);
    return static_cast<int>(std::clamp<long>(k, 1, n) - 1);
}

ScalarField2D::ScalarField2D(const Grid2D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField2D::ScalarField2D(const Grid2D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("field shape mismatch");
    }
}

bool ScalarField2D::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField2D::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

void ScalarField2D::add_scaled(const ScalarField2D& other, double a) {
    check_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += a * other.values_[i];
    }
}

ScalarField2D sine_mode(const Grid2D& grid, int k, int m) {
    ScalarField2D f(grid);
    const double w = std::numbers::pi / grid.length;
    for (int iy = 0; iy < grid.n; ++iy) {
        const double sy = std::sin(m * w * grid.coord(iy));
        for (int ix = 0; ix < grid.n; ++ix) {
            f.at(ix, iy) = std::sin(k * w * grid.coord(ix)) * sy;
        }
    }
    return f;
}

double sine_eigenvalue(const Grid2D& grid, int k, int m) {
    const double w = std::numbers::pi / grid.length;
    return (k * w) * (k * w) + (m * w) * (m * w);
}

struct SpectralWorkspace::Impl {
    Grid2D grid;
    std::vector<double> eigen;
    double* buf_in = nullptr;
    double* buf_out = nullptr;
    fftw_plan plan = nullptr;

    explicit Impl(const Grid2D& g) : grid(g), eigen(g.size()) {
        for (int m = 1; m <= g.n; ++m) {
            for (int k = 1; k <= g.n; ++k) {
                eigen[g.index(k - 1, m - 1)] = sine_eigenvalue(g, k, m);
            }
        }
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf_in = fftw_alloc_real(g.size());
        buf_out = fftw_alloc_real(g.size());
        // Row-major n x n with iy slow: dims (n_y, n_x).
        plan = fftw_plan_r2r_2d(g.n, g.n, buf_in, buf_out, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (plan) fftw_destroy_plan(plan);
        fftw_free(buf_in);
        fftw_free(buf_out);
    }
};

SpectralWorkspace::SpectralWorkspace(const Grid2D& grid) : impl_(std::make_unique<Impl>(grid)) {}
SpectralWorkspace::~SpectralWorkspace() = default;
SpectralWorkspace::SpectralWorkspace(SpectralWorkspace&&) noexcept = default;
SpectralWorkspace& SpectralWorkspace::operator=(SpectralWorkspace&&) noexcept = default;

const Grid2D& SpectralWorkspace::grid() const { return impl_->grid; }
std::span<const double> SpectralWorkspace::eigenvalues() const { return impl_->eigen; }
double SpectralWorkspace::max_eigenvalue() const { return impl_->eigen.back(); }

void SpectralWorkspace::dst2(std::span<const double> in, std::span<double> out) {
    const std::size_t n = impl_->grid.size();
    if (in.size() != n || out.size() != n) {
        throw ConfigError("field shape mismatch");
    }
    std::copy(in.begin(), in.end(), impl_->buf_in);
    fftw_execute(impl_->plan);
    std::copy(impl_->buf_out, impl_->buf_out + n, out.begin());
}

std::vector<double> sine_transform_forward(const ScalarField2D& field, SpectralWorkspace& ws) {
    check_same_grid(field.grid(), ws.grid());
    std::vector<double> coeffs(field.size());
    ws.dst2(field.values(), coeffs);
    // RODFT00 carries a factor 2 per dimension; amplitudes need 2/(n+1) per dimension.
    const double np1 = field.grid().n + 1;
    const double scale = 1.0 / (np1 * np1);
    for (double& c : coeffs) {
        c *= scale;
    }
    return coeffs;
}

ScalarField2D sine_transform_inverse(std::span<const double> coeffs, SpectralWorkspace& ws) {
    ScalarField2D out(ws.grid());
    ws.dst2(coeffs, out.values());
    for (double& v : out.values()) {
        v *= 0.25;
    }
    return out;
}

ScalarField2D laplacian(const ScalarField2D& field, SpectralWorkspace& ws) {
    std::vector<double> coeffs = sine_transform_forward(field, ws);
    const auto lambda = ws.eigenvalues();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        coeffs[i] *= -lambda[i];
    }
    return sine_transform_inverse(coeffs, ws);
}

double region_volume_integral(const ScalarField2D& field, const Region& region, double d_z) {
    if (region.cells.empty()) {
        throw ConfigError("region '" + region.label + "' is empty");
    }
    const auto v = field.values();
    double sum = 0.0;
    for (std::size_t k = 0; k < region.cells.size(); ++k) {
        const std::size_t c = region.cells[k];
        if (c >= v.size()) {
            throw ConfigError("region '" + region.label + "' lies outside the grid");
        }
        sum += region.weights[k] * v[c];
    }
    const double dx = field.grid().dx();
    return sum * dx * dx * d_z;
}

}  // namespace inject
