#include "inject_sim/diffusion.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <fmt/format.h>

#include "inject_sim/errors.hpp"

namespace inject {

namespace {

// Real-axis stability bound of three-stage third-order RK schemes.
constexpr double kRk3RealStability = 2.51;
constexpr double kDtSafety = 0.8;

void add_scaled_vec(std::vector<double>& y, const std::vector<double>& d, double a) {
    if (y.size() != d.size()) {
        throw ConfigError("state shape mismatch");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += a * d[i];
    }
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

WellLayout build_layout(const std::vector<WellSpec>& specs, const Grid2D& grid) {
    WellLayout layout;
    std::set<std::size_t> used;
    for (const auto& s : specs) {
        if (!(s.x_km > 0.0 && s.x_km < grid.length && s.y_km > 0.0 && s.y_km < grid.length)) {
            throw ConfigError("wells: '" + s.label + "' lies outside the open domain");
        }
        Well w{s.label, s.x_km, s.y_km, grid.index(grid.nearest_index(s.x_km), grid.nearest_index(s.y_km))};
        if (!used.insert(w.node).second) {
            throw ConfigError("wells: '" + s.label + "' maps to the same grid node as another well");
        }
        layout.wells.push_back(std::move(w));
    }
    return layout;
}

void CoupledState::add_scaled(const CoupledState& d, double a) {
    u.add_scaled(d.u, a);
    add_scaled_vec(R, d.R, a);
    add_scaled_vec(nu, d.nu, a);
}

ScalarField2D assemble_sources(const WellLayout& layout, std::span<const double> fluxes_km3hr,
                               const ReservoirParams& params, const Grid2D& grid) {
    if (fluxes_km3hr.size() != layout.size()) {
        throw ConfigError(fmt::format("flux vector has {} entries, layout has {} wells", fluxes_km3hr.size(),
                                      layout.size()));
    }
    ScalarField2D s(grid);
    const double dx = grid.dx();
    const double cell = params.beta * dx * dx * params.d_z;
    auto v = s.values();
    for (std::size_t j = 0; j < layout.size(); ++j) {
        v[layout.wells[j].node] += fluxes_km3hr[j] / cell;
    }
    return s;
}

ScalarField2D pressure_rhs(const ScalarField2D& u, const ScalarField2D& sources, const ReservoirParams& params,
                           SpectralWorkspace& ws) {
    ScalarField2D out = laplacian(u, ws);
    const auto src = sources.values();
    auto o = out.values();
    if (src.size() != o.size()) {
        throw ConfigError("field shape mismatch");
    }
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = params.c_hy * o[i] + src[i];
    }
    return out;
}

double stable_dt(const ReservoirParams& params, const Grid2D& grid, double dt_max_hr) {
    const double lambda_max = sine_eigenvalue(grid, grid.n, grid.n);
    const double rate = params.c_hy * lambda_max;
    if (!(rate > 0.0)) {
        return dt_max_hr;
    }
    return std::min(kDtSafety * kRk3RealStability / rate, dt_max_hr);
}

ScalarField2D init_random_pressure(const Grid2D& grid, std::uint64_t seed, double amp_mpa) {
    if (!(amp_mpa >= 0.0)) {
        throw ConfigError("initial pressure amplitude must be >= 0");
    }
    ScalarField2D u(grid);
    std::mt19937_64 gen(seed);
    for (double& v : u.values()) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        v = amp_mpa * (2.0 * unit - 1.0);
    }
    return u;
}

CoupledState rk3_step(const CoupledState& state, double dt, const CoupledRhs& rhs) {
    CoupledState next = bogacki_shampine_step(state, state.t, dt, rhs);
    next.t = state.t + dt;
    if (!next.u.all_finite() || !all_finite(next.R) || !all_finite(next.nu)) {
        const double mu = next.u.all_finite() ? next.u.max_abs() : std::numeric_limits<double>::infinity();
        throw BlowUpError(fmt::format("non-finite state at t = {} hr (max |u| before step = {} MPa)", next.t,
                                      state.u.max_abs()),
                          next.t, mu);
    }
    for (std::size_t i = 0; i < next.R.size(); ++i) {
        if (!(next.R[i] > 0.0)) {
            throw BlowUpError(fmt::format("seismicity rate R{} lost positivity at t = {} hr (R = {})", i + 1, next.t,
                                          next.R[i]),
                              next.t, next.u.max_abs());
        }
    }
    return next;
}

}  // namespace inject
