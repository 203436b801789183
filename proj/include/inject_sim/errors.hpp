#pragma once

#include <stdexcept>
#include <string>

namespace inject {

/// Invalid configuration or argument; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure while integrating the coupled state.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, double t_hr, double max_abs_u)
        : std::runtime_error(what), t_hr_(t_hr), max_abs_u_(max_abs_u) {}

    double t_hr() const noexcept { return t_hr_; }
    double max_abs_u() const noexcept { return max_abs_u_; }

private:
    double t_hr_;
    double max_abs_u_;
};

}  // namespace inject
