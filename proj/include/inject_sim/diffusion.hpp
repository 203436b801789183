#pragma once

/**
 * @file diffusion.hpp
 * @brief Depth-averaged pressure diffusion with point-source wells, and the
 *        third-order explicit Runge-Kutta stepper for the coupled state.
 *
 *   u_t = c_hy lap(u) + (1/beta) sum_j Q_j delta(x - x_j)
 *
 * Point sources are collocated at the nearest interior node with value
 * Q_j / (beta dx dy D_z), so beta * integral(sources) dV = sum_j Q_j.
 */

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "inject_sim/spectral_field.hpp"
#include "inject_sim/units_params.hpp"

namespace inject {

struct Well {
    std::string label;
    double x_km = 0.0;
    double y_km = 0.0;
    std::size_t node = 0;  ///< interior node index on the simulation grid
};

/// Ordered wells; well j is column j of W and of the nominal input matrix.
struct WellLayout {
    std::vector<Well> wells;
    std::size_t size() const { return wells.size(); }
};

/// Throws ConfigError if a well lies outside the open domain or two wells
/// share a grid node.
WellLayout build_layout(const std::vector<WellSpec>& specs, const Grid2D& grid);

/// Pressure field, seismicity rates and controller integral state, integrated
/// together. Also used as the derivative type (t unused there).
struct CoupledState {
    ScalarField2D u;         ///< pressure change [MPa]
    std::vector<double> R;   ///< normalized seismicity rate per region [-]
    std::vector<double> nu;  ///< super-twisting integral state [1/hr]
    double t = 0.0;          ///< [hr]

    void add_scaled(const CoupledState& d, double a);
};

/// Source field [MPa/hr] from well fluxes [km^3/hr].
ScalarField2D assemble_sources(const WellLayout& layout, std::span<const double> fluxes_km3hr,
                               const ReservoirParams& params, const Grid2D& grid);

/// c_hy * lap(u) + sources.
ScalarField2D pressure_rhs(const ScalarField2D& u, const ScalarField2D& sources, const ReservoirParams& params,
                           SpectralWorkspace& ws);

/// Explicit-RK stability limit with safety 0.8, capped at dt_max [hr].
double stable_dt(const ReservoirParams& params, const Grid2D& grid, double dt_max_hr);

/// I.i.d. uniform values in [-amp, amp] from mt19937_64(seed); the 53 high
/// bits of each draw give u in [0,1) and the value is amp*(2u-1).
ScalarField2D init_random_pressure(const Grid2D& grid, std::uint64_t seed, double amp_mpa);

/// Third-order Bogacki-Shampine step (the third-order solution of the
/// 3(2) pair, stages at 0, 1/2, 3/4). State needs add_scaled(const State&, double).
template <class State, class Rhs>
State bogacki_shampine_step(const State& y0, double t, double dt, Rhs&& rhs) {
    const State k1 = rhs(y0, t);
    State y = y0;
    y.add_scaled(k1, 0.5 * dt);
    const State k2 = rhs(y, t + 0.5 * dt);
    y = y0;
    y.add_scaled(k2, 0.75 * dt);
    const State k3 = rhs(y, t + 0.75 * dt);
    State out = y0;
    out.add_scaled(k1, (2.0 / 9.0) * dt);
    out.add_scaled(k2, (1.0 / 3.0) * dt);
    out.add_scaled(k3, (4.0 / 9.0) * dt);
    return out;
}

using CoupledRhs = std::function<CoupledState(const CoupledState&, double)>;

/// One monolithic step of (u, R, nu). Throws BlowUpError when the result is
/// non-finite or a seismicity rate is no longer positive.
CoupledState rk3_step(const CoupledState& state, double dt, const CoupledRhs& rhs);

}  // namespace inject
