#include "inject_sim/seismicity.hpp"

#include <cmath>
#include <string>

#include "inject_sim/errors.hpp"

namespace inject {

double sr_rhs(double R, double ut_region_integral, const Region& region, const ReservoirParams& p) {
    const double forcing = p.f / (p.t_a * p.tau_dot0 * region.volume_km3);
    return forcing * R * ut_region_integral - R * (R - 1.0) / p.t_a;
}

std::vector<double> output_y(std::span<const double> R) {
    std::vector<double> y(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (!(R[i] > 0.0)) {
            throw BlowUpError("seismicity rate R" + std::to_string(i + 1) + " is not positive", 0.0, 0.0);
        }
        y[i] = std::log(R[i]);
    }
    return y;
}

double no_injection_closed_form(double R0, double t_hr, double t_a_hr) {
    // R' = -R(R-1)/t_a  =>  1/R relaxes exponentially towards 1.
    return 1.0 / (1.0 - (1.0 - 1.0 / R0) * std::exp(-t_hr / t_a_hr));
}

}  // namespace inject
