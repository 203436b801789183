#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "inject_sim/errors.hpp"
#include "inject_sim/region.hpp"
#include "inject_sim/spectral_field.hpp"

using namespace inject;

namespace {

ScalarField2D random_field(const Grid2D& g, unsigned seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    ScalarField2D f(g);
    for (double& v : f.values()) v = u(rng);
    return f;
}

double max_abs_diff(const ScalarField2D& a, const ScalarField2D& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

Region single_region(const Grid2D& g, std::array<double, 4> rect) {
    return build_regions({RegionSpec{"A", rect, std::nullopt}}, g, 0.1).front();
}

}  // namespace

TEST_CASE("mode (1,1) has a single coefficient") {
    Grid2D g(64, 5.0);
    SpectralWorkspace ws(g);
    const auto c = sine_transform_forward(sine_mode(g, 1, 1), ws);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-13);

    const auto c23 = sine_transform_forward(sine_mode(g, 2, 3), ws);
    CHECK(c23[(3 - 1) * 64 + (2 - 1)] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("zero field transforms to zero") {
    Grid2D g(32, 5.0);
    SpectralWorkspace ws(g);
    for (double v : sine_transform_forward(ScalarField2D(g), ws)) CHECK(v == 0.0);
    CHECK(laplacian(ScalarField2D(g), ws).max_abs() == 0.0);
}

TEST_CASE("forward then inverse round trip") {
    for (int n : {16, 64, 128}) {
        Grid2D g(n, 5.0);
        SpectralWorkspace ws(g);
        const auto f = random_field(g, 11u + static_cast<unsigned>(n), 3.0);
        const auto back = sine_transform_inverse(sine_transform_forward(f, ws), ws);
        CHECK(max_abs_diff(f, back) < 1e-12 * f.max_abs());
    }
}

TEST_CASE("laplacian of the first mode") {
    Grid2D g(64, 5.0);
    SpectralWorkspace ws(g);
    const double factor = -2.0 * std::numbers::pi * std::numbers::pi / 25.0;
    CHECK(factor == doctest::Approx(-0.78957).epsilon(1e-5));
    const auto phi = sine_mode(g, 1, 1);
    const auto lap = laplacian(phi, ws);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        CHECK(lap.values()[i] == doctest::Approx(factor * phi.values()[i]).epsilon(1e-10).scale(0));
    }
    CHECK(-sine_eigenvalue(g, 1, 1) == doctest::Approx(factor).epsilon(1e-14));
}

TEST_CASE("eigen-relation holds for every mode") {
    for (int n : {16, 64}) {
        Grid2D g(n, 5.0);
        SpectralWorkspace ws(g);
        double worst = 0.0;
        for (int m = 1; m <= n; ++m) {
            for (int k = 1; k <= n; ++k) {
                const auto phi = sine_mode(g, k, m);
                const auto lap = laplacian(phi, ws);
                const double lambda = sine_eigenvalue(g, k, m);
                double err = 0.0;
                for (std::size_t i = 0; i < phi.size(); ++i) {
                    err = std::max(err, std::abs(lap.values()[i] + lambda * phi.values()[i]));
                }
                worst = std::max(worst, err / (lambda * phi.max_abs()));
            }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("laplacian is linear") {
    Grid2D g(64, 5.0);
    SpectralWorkspace ws(g);
    const auto f = random_field(g, 1);
    const auto h = random_field(g, 2);
    const double a = 0.7, b = -2.3;
    ScalarField2D combo(g);
    combo.add_scaled(f, a);
    combo.add_scaled(h, b);
    auto rhs = laplacian(f, ws);
    for (auto& v : rhs.values()) v *= a;
    rhs.add_scaled(laplacian(h, ws), b);
    const auto lhs = laplacian(combo, ws);
    CHECK(max_abs_diff(lhs, rhs) < 1e-12 * rhs.max_abs());
}

TEST_CASE("constant field over a node-aligned rectangle") {
    Grid2D g(64, 5.0);
    const Region r = single_region(g, {2.0, 2.0, 3.0, 3.0});
    const double c = 3.25;
    CHECK(region_volume_integral(ScalarField2D(g, c), r, 0.1) == doctest::Approx(c * 1.0 * 0.1).epsilon(1e-13));
    CHECK(region_volume_integral(ScalarField2D(g), r, 0.1) == 0.0);

    const Region r2 = single_region(g, {1.0, 0.6153846153846154, 4.0, 3.0});  // 8 dx .. 39 dx
    CHECK(region_volume_integral(ScalarField2D(g, c), r2, 0.1) ==
          doctest::Approx(c * 3.0 * (3.0 - 8.0 * g.dx()) * 0.1).epsilon(1e-12));
}

TEST_CASE("Gaussian bump against a 4x finer quadrature") {
    const double x0 = 2.3, y0 = 2.6, s = 0.5;
    auto bump = [&](double x, double y) {
        return std::exp(-((x - x0) * (x - x0) + (y - y0) * (y - y0)) / (2 * s * s));
    };
    Grid2D g(64, 5.0);
    ScalarField2D f(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) f.at(ix, iy) = bump(g.coord(ix), g.coord(iy));
    const Region r = single_region(g, {1.0, 1.0, 4.0, 4.0});
    const double coarse = region_volume_integral(f, r, 0.1);

    // independent composite Simpson rule on [1,4]^2 with 4x the nodes
    const int N = 4 * 39;
    const double h = 3.0 / N;
    double fine = 0.0;
    for (int j = 0; j <= N; ++j) {
        const double wy = (j == 0 || j == N) ? 1 : (j % 2 ? 4 : 2);
        for (int i = 0; i <= N; ++i) {
            const double wx = (i == 0 || i == N) ? 1 : (i % 2 ? 4 : 2);
            fine += wx * wy * bump(1.0 + i * h, 1.0 + j * h);
        }
    }
    fine *= h * h / 9.0 * 0.1;
    CHECK(std::abs(coarse - fine) / fine < 1e-3);
}

TEST_CASE("integral is additive over disjoint regions") {
    Grid2D g(64, 5.0);
    const auto f = random_field(g, 5);
    const auto regions = build_regions(
        {
            RegionSpec{"outer", {0.0, 0.0, 5.0, 5.0}, std::string("inner")},
            RegionSpec{"inner", {2.0, 2.0, 3.0, 3.0}, std::nullopt},
        },
        g, 0.1);
    const Region whole = single_region(g, {0.0, 0.0, 5.0, 5.0});
    const double sum = region_volume_integral(f, regions[0], 0.1) + region_volume_integral(f, regions[1], 0.1);
    CHECK(sum == doctest::Approx(region_volume_integral(f, whole, 0.1)).epsilon(1e-12));
}

TEST_CASE("grid helpers") {
    Grid2D g(64, 5.0);
    CHECK(g.dx() == doctest::Approx(5.0 / 65.0));
    CHECK(g.nearest_index(2.5) == 32);  // 32.5 rounds up to node 33
    CHECK(g.nearest_index(-1.0) == 0);
    CHECK(g.nearest_index(10.0) == 63);
    SpectralWorkspace ws(g);
    CHECK(ws.max_eigenvalue() == doctest::Approx(2.0 * std::pow(64.0 * std::numbers::pi / 5.0, 2)));
    Grid2D other(32, 5.0);
    CHECK_THROWS(laplacian(ScalarField2D(other), ws));
}
