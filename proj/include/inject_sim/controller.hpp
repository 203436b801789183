#pragma once

/**
 * @file controller.hpp
 * @brief MIMO super-twisting tracking controller with flux-demand allocation.
 *
 *   Qbar = Wbar Q_c + W^T (W W^T)^{-1} D(t)
 *   Q_c  = B_eff^{-1} ( -K1 |y_e|^{1/(1-l)} sign(y_e) + nu + rdot )
 *   nu'  = -K2 |y_e|^{(1+l)/(1-l)} sign(y_e)
 *
 * B_eff = B0_full * Wbar, where B0_full (m_c x m) holds the nominal
 * sensitivity of each region's log-rate to each well's flux. Every
 * Qbar produced satisfies W Qbar = D(t) by construction.
 */

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "inject_sim/diffusion.hpp"
#include "inject_sim/region.hpp"
#include "inject_sim/units_params.hpp"

namespace inject {

inline constexpr double kGainMax = 5e-4;

/// Elementwise |v|^gamma sign(v), with sign(0) = 0 for every gamma >= 0.
std::vector<double> signed_power(std::span<const double> v, double gamma);
double signed_power(double v, double gamma);

/// Null-space basis of a full-row-rank W (m_r x m), m x (m - m_r).
///
/// Elimination runs over the columns from last to first, so pivots sit on
/// the rightmost independent columns. Each basis vector has a 1 at one
/// free column and zeros at the other free columns; for
/// W = [[1.01,1,0,0],[0,0,1,1]] this yields [1,-1.01,0,0] and [0,0,1,-1].
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& W);

/// Minimum-norm solution of W q = D.
Eigen::VectorXd demand_particular(const Eigen::MatrixXd& W, const Eigen::VectorXd& D);

struct FluxConstraint {
    Eigen::MatrixXd W;     ///< m_r x m
    Eigen::MatrixXd Wbar;  ///< m x m_c
    Eigen::MatrixXd P;     ///< m x m_r, W^T (W W^T)^{-1}

    static FluxConstraint make(const Eigen::MatrixXd& W);
    int num_wells() const { return static_cast<int>(W.cols()); }
    int num_restrictions() const { return static_cast<int>(W.rows()); }
    int num_controlled() const { return static_cast<int>(Wbar.cols()); }
};

struct ControllerGains {
    double k1 = 0.0;
    double k2 = 0.0;
    double l = -1.0;

    /// Throws ConfigError outside k1, k2 in [0, 5e-4], l in [-1, 0].
    void validate() const;
    double proportional_exponent() const { return 1.0 / (1.0 - l); }
    double integral_exponent() const { return (1.0 + l) / (1.0 - l); }

    bool operator==(const ControllerGains&) const = default;
};

struct NominalInputMatrix {
    Eigen::MatrixXd full;     ///< m_c x m
    Eigen::MatrixXd eff;      ///< m_c x m_c, full * Wbar
    Eigen::MatrixXd eff_inv;
    double condition = 0.0;   ///< 2-norm condition number of eff
};

/// Nominal coefficient f0 / (t_a0 tau_dot0_0 beta0 V_i) for each well inside
/// region i, scaled by the well node's region weight (1 strictly inside).
/// Region volumes are used as given. Throws if a region holds no
/// well or B_eff has condition number above 1e12.
NominalInputMatrix build_b0(const WellLayout& layout, const std::vector<Region>& regions,
                            const ReservoirParams& nominal, const FluxConstraint& constraint);

struct ControllerOutput {
    Eigen::VectorXd Q_c;     ///< virtual control [km^3/hr]
    Eigen::VectorXd Q_bar;   ///< well fluxes [km^3/hr]
    Eigen::VectorXd nu_dot;  ///< [1/hr^2]
};

ControllerOutput control_flux(std::span<const double> y_e, std::span<const double> nu, std::span<const double> r_dot,
                              const ControllerGains& gains, const NominalInputMatrix& b0,
                              const FluxConstraint& constraint, const Eigen::VectorXd& demand);

/// D - W Qbar, accumulated in extended precision.
Eigen::VectorXd residual_vector(const Eigen::MatrixXd& W, const Eigen::VectorXd& Q_bar, const Eigen::VectorXd& D);

/// ||W Qbar - D||_inf, accumulated in extended precision.
double constraint_residual(const FluxConstraint& constraint, const Eigen::VectorXd& Q_bar, const Eigen::VectorXd& D);

struct TrackingMetrics {
    double mise = 0.0;
    double rms = 0.0;
};

/// Trapezoidal MISE = (1/T) int ||y_e||^2 dt and RMS = sqrt((1/T) int ||Q_c||^2 dt),
/// T = t.back() - t.front(). Rows of y_e and q_c are samples at t.
TrackingMetrics metrics_mise_rms(std::span<const double> t, const std::vector<std::vector<double>>& y_e,
                                 const std::vector<std::vector<double>>& q_c);

}  // namespace inject
