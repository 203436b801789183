#pragma once

/**
 * @file units_params.hpp
 * @brief Physical parameters, unit conventions and JSON configuration.
 *
 * Internal units are km / hr / MPa throughout. Fluxes cross the I/O
 * boundary in m^3/hr and are converted with m3hr_to_km3hr().
 */

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace inject {

inline constexpr double kKm3PerM3 = 1e-9;
inline constexpr double kHoursPerDay = 24.0;
inline constexpr double kHoursPerMonth = 365.25 * kHoursPerDay / 12.0;  // 730.5
inline constexpr double kHoursPerYear = 365.25 * kHoursPerDay;

constexpr double m3hr_to_km3hr(double q) { return q * kKm3PerM3; }
constexpr double km3hr_to_m3hr(double q) { return q / kKm3PerM3; }

/// Reservoir physics. Defaults are the nominal reservoir of the reference
/// problem (5 km x 5 km x 100 m).
struct ReservoirParams {
    double c_hy = 3.6e-4;      ///< hydraulic diffusivity [km^2/hr]
    double beta = 1.2e-4;      ///< mixture compressibility [1/MPa]
    double f = 0.5;            ///< friction coefficient [-]
    double tau_dot0 = 1e-6;    ///< background stressing rate [MPa/hr]
    double t_a = 500100.0;     ///< characteristic decay time [hr]
    double d_x = 5.0;          ///< lateral size [km]
    double d_y = 5.0;          ///< lateral size [km]
    double d_z = 0.1;          ///< thickness [km]

    /// Throws ConfigError naming the first bad field.
    void validate() const;

    bool operator==(const ReservoirParams&) const = default;
};

/// Scale every physical coefficient by `inflation`; geometry is kept exact.
ReservoirParams nominal_params(const ReservoirParams& p, double inflation);

struct WellSpec {
    std::string label;
    double x_km = 0.0;
    double y_km = 0.0;
    bool operator==(const WellSpec&) const = default;
};

struct RegionSpec {
    std::string label;
    std::array<double, 4> rect_km{};  ///< x0, y0, x1, y1 (half-open on the upper edges)
    std::optional<std::string> complement_of;
    bool operator==(const RegionSpec&) const = default;
};

enum class DemandKind { Constant, Square, Schedule };

struct DemandSpec {
    DemandKind kind = DemandKind::Constant;
    double qs_m3_hr = 15.0;
    double period_hr = 720.0;
    double duty = 0.5;
    /// (t_hr, multiplier) breakpoints, used when kind == Schedule.
    std::vector<std::array<double, 2>> schedule;
    /// D(t) = qs(t) * pattern; one entry per flux restriction.
    std::vector<double> pattern{1.0, -1.0};
    bool operator==(const DemandSpec&) const = default;
};

struct ReferenceSpec {
    std::vector<double> final_log_sr{0.0, 1.6094379124341003};  // ln 1, ln 5
    double ramp_hr = 4380.0;  // six months
    bool operator==(const ReferenceSpec&) const = default;
};

struct ScenarioSpec {
    DemandSpec demand;
    ReferenceSpec reference;
    std::vector<std::vector<double>> W{{1.01, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 1.0}};
    /// Injection point used by the uncontrolled demonstration run.
    std::array<double, 2> nocontrol_well_km{2.5, 2.5};
    bool operator==(const ScenarioSpec&) const = default;
};

struct ControllerSpec {
    double k1 = 5e-4;
    double k2 = 5e-4;
    double l = -1.0;
    bool fixed_gains = false;
    bool operator==(const ControllerSpec&) const = default;
};

struct EnvSpec {
    int decisions = 100;
    double episode_hr = 4380.0;
    double alpha = 0.5;
    double y_ref = 1.0;
    double q_ref = 1e6;
    bool extended_obs = false;
    bool operator==(const EnvSpec&) const = default;
};

struct SimulationConfig {
    ReservoirParams reservoir;
    int grid_n = 64;
    double dt_max_hr = 1.0;
    double t_end_hr = kHoursPerYear;
    std::uint64_t seed = 0;
    double init_pressure_kpa = 10.0;  ///< amplitude of the random initial field [kPa]
    double snapshot_hr = kHoursPerMonth;
    double nominal_inflation = 1.1;
    ScenarioSpec scenario;
    std::vector<WellSpec> wells;
    std::vector<RegionSpec> regions;
    ControllerSpec controller;
    EnvSpec env;

    /// Defaults: four wells, V1 = domain minus V2, V2 = [2,3] x [2,3] km.
    SimulationConfig();

    void validate() const;

    /// Initial-field amplitude in internal units [MPa].
    double init_pressure_amp() const { return init_pressure_kpa * 1e-3; }

    bool operator==(const SimulationConfig&) const = default;
};

SimulationConfig load_config(const std::filesystem::path& path);
SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimulationConfig& cfg);

}  // namespace inject
