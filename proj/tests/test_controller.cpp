#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "inject_sim/controller.hpp"
#include "inject_sim/errors.hpp"
#include "st_probe.hpp"

using namespace inject;

namespace {

Eigen::MatrixXd paper_w() {
    Eigen::MatrixXd W(2, 4);
    W << 1.01, 1, 0, 0, 0, 0, 1, 1;
    return W;
}

struct Setup {
    Grid2D grid{64, 5.0};
    WellLayout layout;
    std::vector<Region> regions;
    FluxConstraint constraint;
    NominalInputMatrix b0;
};

Setup default_setup(const ReservoirParams& nominal, const std::vector<int>& order = {0, 1, 2, 3}) {
    const SimulationConfig cfg;
    Setup s;
    std::vector<WellSpec> wells;
    Eigen::MatrixXd W(2, 4);
    const Eigen::MatrixXd W0 = paper_w();
    for (int j = 0; j < 4; ++j) {
        wells.push_back(cfg.wells[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
        W.col(j) = W0.col(order[static_cast<std::size_t>(j)]);
    }
    s.layout = build_layout(wells, s.grid);
    s.regions = build_regions(cfg.regions, s.grid, 0.1);
    s.constraint = FluxConstraint::make(W);
    s.b0 = build_b0(s.layout, s.regions, nominal, s.constraint);
    return s;
}

}  // namespace

TEST_CASE("signed power") {
    CHECK(signed_power(std::vector<double>{-4.0}, 0.5) == std::vector<double>{-2.0});
    CHECK(signed_power(std::vector<double>{-0.3, 0.7}, 0.0) == std::vector<double>{-1.0, 1.0});
    for (double g : {0.0, 0.5, 1.0, 2.0}) CHECK(signed_power(0.0, g) == 0.0);
    CHECK(signed_power(-8.0, 1.0 / 3.0) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(signed_power(std::vector<double>{1.0}, -0.5), ConfigError);
}

TEST_CASE("null space of the paper restriction matrix") {
    const Eigen::MatrixXd W = paper_w();
    const Eigen::MatrixXd Wbar = null_space_basis(W);
    REQUIRE(Wbar.rows() == 4);
    REQUIRE(Wbar.cols() == 2);
    Eigen::MatrixXd expected(4, 2);
    expected << 1, 0, -1.01, 0, 0, 1, 0, -1;
    CHECK((Wbar - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((W * Wbar).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::MatrixXd W1(1, 2);
    W1 << 1, 0;
    const Eigen::MatrixXd b1 = null_space_basis(W1);
    CHECK(b1.rows() == 2);
    CHECK(b1(0, 0) == 0.0);
    CHECK(b1(1, 0) == 1.0);
}

TEST_CASE("null space of random full-rank matrices") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 3 + trial % 5;
        const int r = 1 + trial % (m - 1);
        Eigen::MatrixXd W(r, m);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < m; ++j) W(i, j) = u(rng);
        const Eigen::MatrixXd B = null_space_basis(W);
        CHECK(B.cols() == m - r);
        CHECK((W * B).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        CHECK(lu.rank() == m - r);
    }
    Eigen::MatrixXd bad(2, 3);
    bad << 1, 2, 3, 2, 4, 6;
    CHECK_THROWS_AS(null_space_basis(bad), ConfigError);
    CHECK_THROWS_AS(null_space_basis(Eigen::MatrixXd::Identity(2, 2)), ConfigError);
}

TEST_CASE("minimum-norm demand allocation") {
    const Eigen::MatrixXd W = paper_w();
    const double qs = 15.0;
    Eigen::VectorXd D(2);
    D << qs, -qs;
    const Eigen::VectorXd q = demand_particular(W, D);
    CHECK(q(0) == doctest::Approx(1.01 * 15.0 / 2.0201).epsilon(1e-14));
    CHECK(q(1) == doctest::Approx(15.0 / 2.0201).epsilon(1e-14));
    CHECK(q(2) == doctest::Approx(-7.5).epsilon(1e-14));
    CHECK(q(3) == doctest::Approx(-7.5).epsilon(1e-14));
    CHECK((W * q - D).cwiseAbs().maxCoeff() < 1e-13);

    CHECK(demand_particular(W, Eigen::VectorXd::Zero(2)).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd Q(2, 3);
    const double s = 1.0 / std::sqrt(2.0);
    Q << s, s, 0, 0, 0, 1;
    Eigen::VectorXd d2(2);
    d2 << 0.3, -1.2;
    CHECK((demand_particular(Q, d2) - Q.transpose() * d2).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(demand_particular(Q, Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("nominal input matrix of the default layout") {
    const ReservoirParams p;
    const ReservoirParams nom = nominal_params(p, 1.1);
    const Setup s = default_setup(nom);
    const double c0 = nom.f / (nom.t_a * nom.tau_dot0 * nom.beta);
    const double V1 = 2.4, V2 = 0.1;
    Eigen::MatrixXd full(2, 4);
    full << 1 / V1, 0, 0, 1 / V1, 0, 1 / V2, 1 / V2, 0;
    full *= c0;
    CHECK((s.b0.full - full).cwiseAbs().maxCoeff() < 1e-12 * full.cwiseAbs().maxCoeff());

    Eigen::MatrixXd eff(2, 2);
    eff << 1 / V1, -1 / V1, -1.01 / V2, 1 / V2;
    eff *= c0;
    CHECK((s.b0.eff - eff).cwiseAbs().maxCoeff() < 1e-12 * eff.cwiseAbs().maxCoeff());
    CHECK(s.b0.eff.determinant() == doctest::Approx(-0.01 * c0 * c0 / (V1 * V2)).epsilon(1e-9));
    CHECK((s.b0.eff * s.b0.eff_inv - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s.b0.condition > 1000.0);

    const Setup t = default_setup(nominal_params(p, 1.0));
    const double c = p.f / (p.t_a * p.tau_dot0 * p.beta);
    CHECK(t.b0.full(0, 0) == doctest::Approx(c / V1).epsilon(1e-14));
    CHECK(t.b0.full(1, 1) == doctest::Approx(c / V2).epsilon(1e-14));
}

TEST_CASE("a region without a well is rejected") {
    const SimulationConfig cfg;
    Grid2D g(64, 5.0);
    const auto layout = build_layout({WellSpec{"a", 1.0, 1.0}, WellSpec{"b", 1.5, 1.0}, WellSpec{"c", 4.0, 4.0},
                                      WellSpec{"d", 0.5, 0.5}},
                                     g);
    const auto regions = build_regions(cfg.regions, g, 0.1);
    CHECK_THROWS_AS(build_b0(layout, regions, ReservoirParams{}, FluxConstraint::make(paper_w())), ConfigError);
}

TEST_CASE("control flux") {
    const Setup s = default_setup(nominal_params(ReservoirParams{}, 1.1));
    Eigen::VectorXd D(2);
    D << 1.5e-8, -1.5e-8;
    const std::vector<double> zero{0.0, 0.0};

    const auto out0 = control_flux(zero, zero, zero, ControllerGains{5e-4, 5e-4, -1.0}, s.b0, s.constraint, D);
    CHECK(out0.Q_c.cwiseAbs().maxCoeff() == 0.0);
    CHECK((out0.Q_bar - s.constraint.P * D).cwiseAbs().maxCoeff() < 1e-14 * D.norm());
    CHECK(out0.nu_dot.cwiseAbs().maxCoeff() == 0.0);

    const std::vector<double> ye{0.04, -0.25};
    const std::vector<double> nu{1e-6, -2e-6};
    const std::vector<double> rdot{0.0, 3e-4};
    const ControllerGains g1{5e-4, 4e-4, -1.0};
    const auto a = control_flux(ye, nu, rdot, g1, s.b0, s.constraint, D);
    Eigen::VectorXd v(2);
    v << -5e-4 * std::sqrt(0.04) + 1e-6, 5e-4 * std::sqrt(0.25) - 2e-6 + 3e-4;
    CHECK((a.Q_c - s.b0.eff_inv * v).cwiseAbs().maxCoeff() <= 1e-14 * a.Q_c.cwiseAbs().maxCoeff());
    CHECK(a.nu_dot(0) == -4e-4);
    CHECK(a.nu_dot(1) == 4e-4);

    const ControllerGains g0{5e-4, 4e-4, 0.0};
    const auto b = control_flux(ye, nu, rdot, g0, s.b0, s.constraint, D);
    v << -5e-4 * 0.04 + 1e-6, 5e-4 * 0.25 - 2e-6 + 3e-4;
    CHECK((b.Q_c - s.b0.eff_inv * v).cwiseAbs().maxCoeff() <= 1e-14 * b.Q_c.cwiseAbs().maxCoeff());
    CHECK(b.nu_dot(0) == doctest::Approx(-4e-4 * 0.04));
    CHECK(b.nu_dot(1) == doctest::Approx(4e-4 * 0.25));

    CHECK_THROWS_AS(control_flux(std::vector<double>{0.0}, zero, zero, g1, s.b0, s.constraint, D), ConfigError);
}

TEST_CASE("constraint holds for random inputs") {
    const Setup s = default_setup(nominal_params(ReservoirParams{}, 1.1));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1), gain(0, 5e-4), ell(-1, 0);
    for (int i = 0; i < 2000; ++i) {
        const std::vector<double> ye{u(rng), u(rng)};
        const std::vector<double> nu{1e-4 * u(rng), 1e-4 * u(rng)};
        const std::vector<double> rd{1e-4 * u(rng), 1e-4 * u(rng)};
        Eigen::VectorXd D(2);
        D << 1e-7 * u(rng), 1e-7 * u(rng);
        const auto out = control_flux(ye, nu, rd, ControllerGains{gain(rng), gain(rng), ell(rng)}, s.b0, s.constraint, D);
        CHECK(constraint_residual(s.constraint, out.Q_bar, D) <= 1e-12 * std::max(1.0, D.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("exponents are continuous in l") {
    CHECK(ControllerGains{0, 0, -1.0}.proportional_exponent() == 0.5);
    CHECK(ControllerGains{0, 0, -1.0}.integral_exponent() == 0.0);
    CHECK(ControllerGains{0, 0, 0.0}.proportional_exponent() == 1.0);
    CHECK(ControllerGains{0, 0, 0.0}.integral_exponent() == 1.0);
    double p1 = 0.5, p2 = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const ControllerGains g{0, 0, -1.0 + i / 1000.0};
        CHECK(std::abs(g.proportional_exponent() - p1) < 1e-3);
        CHECK(std::abs(g.integral_exponent() - p2) < 3e-3);
        CHECK(g.proportional_exponent() >= p1);
        p1 = g.proportional_exponent();
        p2 = g.integral_exponent();
    }
    CHECK_THROWS_AS((ControllerGains{6e-4, 0, -1}.validate()), ConfigError);
    CHECK_THROWS_AS((ControllerGains{0, 0, 0.1}.validate()), ConfigError);
}

TEST_CASE("well permutation permutes the fluxes") {
    const auto nom = nominal_params(ReservoirParams{}, 1.1);
    const Setup s = default_setup(nom);
    const std::vector<int> order{2, 0, 3, 1};
    const Setup t = default_setup(nom, order);
    Eigen::VectorXd D(2);
    D << 1.5e-8, -1.5e-8;
    const std::vector<double> ye{0.1, -0.3}, nu{1e-6, 2e-6}, rd{0.0, 1e-5};
    const ControllerGains g{5e-4, 5e-4, -0.5};
    const auto a = control_flux(ye, nu, rd, g, s.b0, s.constraint, D);
    const auto b = control_flux(ye, nu, rd, g, t.b0, t.constraint, D);
    const double scale = a.Q_bar.cwiseAbs().maxCoeff();
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(b.Q_bar(j) - a.Q_bar(order[static_cast<std::size_t>(j)])) < 1e-10 * scale);
    }
}

TEST_CASE("scalar super-twisting probe converges in finite time") {
    const auto r = testutil::super_twisting_probe();
    CHECK(r.reach_hr > 0.0);
    CHECK(r.reach_hr < 10000.0);
    CHECK(r.max_after < 1e-3);
    CHECK(r.final_abs < 1e-6);
}

TEST_CASE("tracking metrics") {
    const std::vector<double> t{0, 1, 2, 3};
    const std::vector<std::vector<double>> ye(4, {0.3, 0.0});
    const std::vector<std::vector<double>> q0(4, {0.0, 0.0});
    const auto m = metrics_mise_rms(t, ye, q0);
    CHECK(m.mise == doctest::Approx(0.09).epsilon(1e-14));
    CHECK(m.rms == 0.0);

    const int N = 2001;
    std::vector<double> ts(N);
    std::vector<std::vector<double>> ys(N), qs(N);
    for (int i = 0; i < N; ++i) {
        ts[i] = 2.0 * std::numbers::pi * i / (N - 1);
        ys[i] = {std::sin(ts[i]), 0.0};
        qs[i] = {2.0, 0.0};
    }
    const auto s = metrics_mise_rms(ts, ys, qs);
    CHECK(s.mise == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.rms == doctest::Approx(2.0).epsilon(1e-14));

    CHECK_THROWS_AS(metrics_mise_rms(std::vector<double>{}, {}, {}), ConfigError);
}
