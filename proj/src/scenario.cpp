#include "inject_sim/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "inject_sim/errors.hpp"

namespace inject {

namespace {

// Period index k with k*period <= t < (k+1)*period, using the same products
// that switch_times() emits so switch instants classify exactly.
long period_index(double t, double period) {
    auto k = static_cast<long>(std::floor(t / period));
    while (static_cast<double>(k + 1) * period <= t) ++k;
    while (k > 0 && static_cast<double>(k) * period > t) --k;
    return k;
}

}  // namespace

DemandProfile::DemandProfile(const DemandSpec& spec) : spec_(spec) {
    if (!(spec_.period_hr > 0.0)) throw ConfigError("demand: period_hr must be > 0");
    if (!(spec_.duty >= 0.0 && spec_.duty <= 1.0)) throw ConfigError("demand: duty must be in [0,1]");
    for (std::size_t i = 1; i < spec_.schedule.size(); ++i) {
        if (!(spec_.schedule[i][0] > spec_.schedule[i - 1][0])) {
            throw ConfigError("demand: schedule breakpoints must be strictly increasing");
        }
    }
    if (spec_.pattern.empty()) throw ConfigError("demand: pattern must be non-empty");
}

double DemandProfile::qs_at(double t) const {
    switch (spec_.kind) {
        case DemandKind::Constant:
            return spec_.qs_m3_hr;
        case DemandKind::Square: {
            if (spec_.duty >= 1.0) return spec_.qs_m3_hr;
            if (spec_.duty <= 0.0) return 0.0;
            const long k = period_index(t, spec_.period_hr);
            const double off = static_cast<double>(k) * spec_.period_hr + spec_.duty * spec_.period_hr;
            return t < off ? spec_.qs_m3_hr : 0.0;
        }
        case DemandKind::Schedule: {
            double mult = 1.0;
            for (const auto& bp : spec_.schedule) {
                if (bp[0] <= t) mult = bp[1];
                else break;
            }
            return spec_.qs_m3_hr * mult;
        }
    }
    return spec_.qs_m3_hr;
}

Eigen::VectorXd DemandProfile::demand_at(double t) const {
    const double q = m3hr_to_km3hr(qs_at(t));
    Eigen::VectorXd d(static_cast<Eigen::Index>(spec_.pattern.size()));
    for (std::size_t i = 0; i < spec_.pattern.size(); ++i) {
        d(static_cast<Eigen::Index>(i)) = q * spec_.pattern[i];
    }
    return d;
}

std::vector<double> DemandProfile::switch_times(double t0, double t1) const {
    std::vector<double> out;
    if (!(t1 > t0)) return out;
    switch (spec_.kind) {
        case DemandKind::Constant:
            break;
        case DemandKind::Square: {
            if (spec_.duty <= 0.0 || spec_.duty >= 1.0) break;
            const double p = spec_.period_hr;
            for (long k = std::max(0L, period_index(std::max(t0, 0.0), p) - 1);; ++k) {
                const double on = static_cast<double>(k) * p;
                const double off = on + spec_.duty * p;
                if (on >= t1) break;
                if (on > t0) out.push_back(on);
                if (off > t0 && off < t1) out.push_back(off);
            }
            break;
        }
        case DemandKind::Schedule:
            for (const auto& bp : spec_.schedule) {
                if (bp[0] > t0 && bp[0] < t1) out.push_back(bp[0]);
            }
            break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

ReferenceProfile::ReferenceProfile(const ReferenceSpec& spec) : spec_(spec) {
    if (!(spec_.ramp_hr > 0.0)) throw ConfigError("reference: ramp_hr must be > 0");
}

ReferenceSample ReferenceProfile::reference_at(double t) const {
    const double x = std::clamp(t / spec_.ramp_hr, 0.0, 1.0);
    double s = 1.0;
    double ds = 0.0;
    if (x < 1.0) {
        s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
        ds = 30.0 * x * x * (1.0 - x) * (1.0 - x) / spec_.ramp_hr;
    }
    ReferenceSample out;
    out.r.reserve(dimension());
    out.r_dot.reserve(dimension());
    for (double f : spec_.final_log_sr) {
        out.r.push_back(f * s);
        out.r_dot.push_back(f * ds);
    }
    return out;
}

}  // namespace inject
