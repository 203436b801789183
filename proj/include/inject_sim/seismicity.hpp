#pragma once

#include <span>
#include <vector>

#include "inject_sim/region.hpp"
#include "inject_sim/units_params.hpp"

namespace inject {

/// Normalized seismicity rate per region; R = 1 is the natural rate.
struct SeismicityState {
    std::vector<double> R;
};

/// dR/dt for one region [1/hr], driven by the volume integral of du/dt over
/// the region [MPa km^3/hr]. Uses the true reservoir parameters.
double sr_rhs(double R, double ut_region_integral, const Region& region, const ReservoirParams& params);

/// Tracking output y_i = ln R_i. Throws if any R_i <= 0.
std::vector<double> output_y(std::span<const double> R);

/// Exact relaxation of the rate equation with no injection (test oracle).
double no_injection_closed_form(double R0, double t_hr, double t_a_hr);

}  // namespace inject
