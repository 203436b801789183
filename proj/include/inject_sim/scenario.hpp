#pragma once

#include <vector>

#include <Eigen/Dense>

#include "inject_sim/units_params.hpp"

namespace inject {

/// Flux demand D(t) = q_s(t) * pattern, right-continuous in t.
///
/// Square waves start "on" at t = 0 and switch off after duty*period in
/// each period. Schedules hold the multiplier of the latest breakpoint
/// <= t; before the first breakpoint the multiplier is 1.
class DemandProfile {
public:
    explicit DemandProfile(const DemandSpec& spec);

    /// q_s(t) [m^3/hr]
    double qs_at(double t_hr) const;
    /// D(t) [km^3/hr]
    Eigen::VectorXd demand_at(double t_hr) const;
    /// Discontinuities of D in the open interval (t0, t1), ascending.
    std::vector<double> switch_times(double t0_hr, double t1_hr) const;

    const DemandSpec& spec() const { return spec_; }
    int dimension() const { return static_cast<int>(spec_.pattern.size()); }

private:
    DemandSpec spec_;
};

struct ReferenceSample {
    std::vector<double> r;
    std::vector<double> r_dot;  ///< [1/hr]
};

/// r_i(t) = final_i * s(t / T_ramp) with the quintic smoothstep
/// s(x) = 6x^5 - 15x^4 + 10x^3 clamped to [0,1]; r_dot is analytic.
class ReferenceProfile {
public:
    explicit ReferenceProfile(const ReferenceSpec& spec);

    ReferenceSample reference_at(double t_hr) const;
    std::size_t dimension() const { return spec_.final_log_sr.size(); }

private:
    ReferenceSpec spec_;
};

}  // namespace inject
