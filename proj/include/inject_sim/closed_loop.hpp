#pragma once

/**
 * @file closed_loop.hpp
 * @brief Plant + controller + scenario as one right-hand side, and the
 *        fixed-step driver that advances it.
 *
 * Steps have a fixed nominal size min(stable_dt, dt_max). Segment ends are
 * snapped to demand switches and snapshot instants, and each segment is
 * cut into equal sub-steps no longer than the nominal step. The schedule
 * depends only on the configuration, so runs are reproducible bit for bit.
 */

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "inject_sim/controller.hpp"
#include "inject_sim/diffusion.hpp"
#include "inject_sim/region.hpp"
#include "inject_sim/scenario.hpp"
#include "inject_sim/spectral_field.hpp"
#include "inject_sim/units_params.hpp"

namespace inject {

/// Everything observable at one instant of a closed-loop run.
struct LoopSample {
    double t = 0.0;
    std::vector<double> y;       ///< ln R
    std::vector<double> r;
    std::vector<double> r_dot;
    std::vector<double> y_e;
    std::vector<double> R;
    Eigen::VectorXd Q_c;         ///< [km^3/hr]; empty in open loop
    Eigen::VectorXd Q_bar;       ///< [km^3/hr]
    Eigen::VectorXd demand;      ///< [km^3/hr]; empty in open loop
    double residual_m3hr = 0.0;  ///< ||W Qbar - D||_inf [m^3/hr]
};

class ClosedLoopModel {
public:
    /// Controlled plant: wells, regions, W and demand from the config.
    static ClosedLoopModel controlled(const SimulationConfig& cfg);
    /// Uncontrolled plant: one well at scenario.nocontrol_well_km injecting
    /// the constant q_s of the demand spec.
    static ClosedLoopModel open_loop(const SimulationConfig& cfg);

    ClosedLoopModel(ClosedLoopModel&&) noexcept;
    ClosedLoopModel& operator=(ClosedLoopModel&&) noexcept;
    ~ClosedLoopModel();

    bool is_controlled() const;
    const SimulationConfig& config() const;
    const Grid2D& grid() const;
    const WellLayout& layout() const;
    const std::vector<Region>& regions() const;
    const FluxConstraint& constraint() const;      ///< controlled mode only
    const NominalInputMatrix& nominal_b0() const;  ///< controlled mode only
    const DemandProfile& demand() const;
    const ReferenceProfile& reference() const;
    double step_size() const;

    /// R = 1, nu = 0, t = 0, u random in [-amp, amp] from the seed.
    CoupledState initial_state(std::uint64_t seed) const;

    /// Time derivative of (u, R, nu) at time t with the given gains.
    CoupledState derivative(const CoupledState& s, double t, const ControllerGains& gains);

    /// Outputs, reference, controller fluxes at the state's own time.
    LoopSample sample(const CoupledState& s, const ControllerGains& gains) const;

    /// Step end points in (t0, t1], ascending; last element is t1.
    std::vector<double> step_plan(double t0, double t1) const;

    using StepObserver = std::function<void(const CoupledState&)>;

    /// Advance to t1 following step_plan(). Throws BlowUpError.
    void advance(CoupledState& s, double t1, const ControllerGains& gains, const StepObserver& observer = {});

private:
    struct Impl;
    explicit ClosedLoopModel(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

}  // namespace inject
