#include "inject_sim/controller.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "inject_sim/errors.hpp"

namespace inject {

double signed_power(double v, double gamma) {
    if (v == 0.0) {
        return 0.0;
    }
    const double s = v > 0.0 ? 1.0 : -1.0;
    if (gamma == 0.0) {
        return s;
    }
    return s * std::pow(std::abs(v), gamma);
}

std::vector<double> signed_power(std::span<const double> v, double gamma) {
    if (!(gamma >= 0.0)) {
        throw ConfigError("signed_power: exponent must be >= 0");
    }
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [gamma](double x) { return signed_power(x, gamma); });
    return out;
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& W) {
    const Eigen::Index rows = W.rows();
    const Eigen::Index cols = W.cols();
    if (rows == 0 || rows >= cols) {
        throw ConfigError("null_space_basis: W must have fewer rows than columns");
    }
    const double tol = 1e-12 * std::max(1.0, W.cwiseAbs().maxCoeff()) * static_cast<double>(cols);

    Eigen::MatrixXd A = W;
    std::vector<Eigen::Index> pivot_row(cols, -1);
    Eigen::Index r = 0;
    for (Eigen::Index c = cols - 1; c >= 0 && r < rows; --c) {
        Eigen::Index p = r;
        for (Eigen::Index i = r + 1; i < rows; ++i) {
            if (std::abs(A(i, c)) > std::abs(A(p, c))) p = i;
        }
        if (std::abs(A(p, c)) <= tol) {
            continue;
        }
        A.row(p).swap(A.row(r));
        A.row(r) /= A(r, c);
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (i != r && A(i, c) != 0.0) {
                A.row(i) -= A(i, c) * A.row(r);
            }
        }
        pivot_row[c] = r;
        ++r;
    }
    if (r < rows) {
        throw ConfigError(fmt::format("null_space_basis: W is rank deficient (rank {} < {})", r, rows));
    }

    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(cols, cols - rows);
    Eigen::Index b = 0;
    for (Eigen::Index free = 0; free < cols; ++free) {
        if (pivot_row[free] >= 0) continue;
        basis(free, b) = 1.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (pivot_row[c] >= 0) {
                basis(c, b) = -A(pivot_row[c], free);
            }
        }
        ++b;
    }
    return basis;
}

namespace {

Eigen::MatrixXd right_pseudo_inverse(const Eigen::MatrixXd& W) {
    const Eigen::MatrixXd gram = W * W.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
        throw ConfigError("W W^T is singular; W must have full row rank");
    }
    return W.transpose() * lu.inverse();
}

}  // namespace

Eigen::VectorXd demand_particular(const Eigen::MatrixXd& W, const Eigen::VectorXd& D) {
    if (D.size() != W.rows()) {
        throw ConfigError("demand_particular: D has the wrong length");
    }
    const Eigen::MatrixXd gram = W * W.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
        throw ConfigError("W W^T is singular; W must have full row rank");
    }
    return W.transpose() * lu.solve(D);
}

FluxConstraint FluxConstraint::make(const Eigen::MatrixXd& W) {
    FluxConstraint c;
    c.W = W;
    c.Wbar = null_space_basis(W);
    c.P = right_pseudo_inverse(W);
    return c;
}

void ControllerGains::validate() const {
    if (!(k1 >= 0.0 && k1 <= kGainMax)) throw ConfigError(fmt::format("gain k1 = {} outside [0, 5e-4]", k1));
    if (!(k2 >= 0.0 && k2 <= kGainMax)) throw ConfigError(fmt::format("gain k2 = {} outside [0, 5e-4]", k2));
    if (!(l >= -1.0 && l <= 0.0)) throw ConfigError(fmt::format("exponent l = {} outside [-1, 0]", l));
}

NominalInputMatrix build_b0(const WellLayout& layout, const std::vector<Region>& regions,
                            const ReservoirParams& nominal, const FluxConstraint& constraint) {
    const auto m = static_cast<Eigen::Index>(layout.size());
    const auto mc = static_cast<Eigen::Index>(regions.size());
    if (m != constraint.W.cols()) {
        throw ConfigError("build_b0: well count does not match the columns of W");
    }
    if (mc != constraint.Wbar.cols()) {
        throw ConfigError("build_b0: region count does not match the null-space dimension of W");
    }
    const double c0 = nominal.f / (nominal.t_a * nominal.tau_dot0 * nominal.beta);

    NominalInputMatrix b;
    b.full = Eigen::MatrixXd::Zero(mc, m);
    for (Eigen::Index i = 0; i < mc; ++i) {
        const Region& reg = regions[static_cast<std::size_t>(i)];
        bool any = false;
        for (Eigen::Index j = 0; j < m; ++j) {
            // A well on a region edge feeds the region with its node weight.
            const double w = reg.weight(layout.wells[static_cast<std::size_t>(j)].node);
            if (w > 0.0) {
                b.full(i, j) = c0 * w / reg.volume_km3;
                any = true;
            }
        }
        if (!any) {
            throw ConfigError("uncontrollable region '" + reg.label + "': no well lies inside it");
        }
    }
    b.eff = b.full * constraint.Wbar;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.eff);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    b.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(b.condition <= 1e12)) {
        throw ConfigError(fmt::format("nominal input matrix is near singular (condition number {:.3e})", b.condition));
    }
    b.eff_inv = b.eff.fullPivLu().inverse();
    return b;
}

ControllerOutput control_flux(std::span<const double> y_e, std::span<const double> nu, std::span<const double> r_dot,
                              const ControllerGains& gains, const NominalInputMatrix& b0,
                              const FluxConstraint& constraint, const Eigen::VectorXd& demand) {
    const auto mc = static_cast<std::size_t>(b0.eff.rows());
    if (y_e.size() != mc || nu.size() != mc || r_dot.size() != mc) {
        throw ConfigError("control_flux: vector length does not match the number of controlled regions");
    }
    const double g1 = gains.proportional_exponent();
    const double g2 = gains.integral_exponent();

    ControllerOutput out;
    Eigen::VectorXd v(static_cast<Eigen::Index>(mc));
    out.nu_dot.resize(static_cast<Eigen::Index>(mc));
    for (std::size_t i = 0; i < mc; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        v(k) = -gains.k1 * signed_power(y_e[i], g1) + nu[i] + r_dot[i];
        out.nu_dot(k) = -gains.k2 * signed_power(y_e[i], g2);
    }
    out.Q_c = b0.eff_inv * v;
    out.Q_bar = constraint.Wbar * out.Q_c + constraint.P * demand;
    // W is ill-conditioned in the default layout, so Qbar can be thousands of
    // times larger than D. One refinement pass pulls W Qbar back onto D.
    out.Q_bar += constraint.P * residual_vector(constraint.W, out.Q_bar, demand);
    return out;
}

Eigen::VectorXd residual_vector(const Eigen::MatrixXd& W, const Eigen::VectorXd& Q_bar, const Eigen::VectorXd& D) {
    Eigen::VectorXd r(W.rows());
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        long double acc = static_cast<long double>(D(i));
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            acc -= static_cast<long double>(W(i, j)) * static_cast<long double>(Q_bar(j));
        }
        r(i) = static_cast<double>(acc);
    }
    return r;
}

double constraint_residual(const FluxConstraint& constraint, const Eigen::VectorXd& Q_bar, const Eigen::VectorXd& D) {
    return residual_vector(constraint.W, Q_bar, D).cwiseAbs().maxCoeff();
}

TrackingMetrics metrics_mise_rms(std::span<const double> t, const std::vector<std::vector<double>>& y_e,
                                 const std::vector<std::vector<double>>& q_c) {
    if (t.empty() || y_e.size() != t.size() || q_c.size() != t.size()) {
        throw ConfigError("metrics: traces must be non-empty and share the time axis");
    }
    auto sq = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };
    if (t.size() == 1) {
        return {sq(y_e[0]), std::sqrt(sq(q_c[0]))};
    }
    double iy = 0.0;
    double iq = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double h = t[k] - t[k - 1];
        iy += 0.5 * h * (sq(y_e[k - 1]) + sq(y_e[k]));
        iq += 0.5 * h * (sq(q_c[k - 1]) + sq(q_c[k]));
    }
    const double T = t.back() - t.front();
    if (!(T > 0.0)) {
        throw ConfigError("metrics: time axis must be increasing");
    }
    return {iy / T, std::sqrt(iq / T)};
}

}  // namespace inject
