#include <doctest.h>

#include <cmath>

#include "inject_sim/errors.hpp"
#include "inject_sim/scenario.hpp"

using namespace inject;

namespace {

DemandSpec square(double period = 720.0, double duty = 0.5) {
    DemandSpec s;
    s.kind = DemandKind::Square;
    s.period_hr = period;
    s.duty = duty;
    return s;
}

}  // namespace

TEST_CASE("constant demand") {
    const DemandProfile d(DemandSpec{});
    for (double t : {0.0, 17.3, 4380.0, 1e5}) {
        const auto v = d.demand_at(t);
        CHECK(km3hr_to_m3hr(v(0)) == doctest::Approx(15.0).epsilon(1e-15));
        CHECK(km3hr_to_m3hr(v(1)) == doctest::Approx(-15.0).epsilon(1e-15));
    }
    CHECK(d.switch_times(0.0, 1e5).empty());
}

TEST_CASE("square wave phases") {
    const DemandProfile d(square());
    CHECK(d.qs_at(0.0) == 15.0);
    CHECK(d.qs_at(359.999) == 15.0);
    CHECK(d.qs_at(360.0) == 0.0);  // right-continuous
    CHECK(d.qs_at(500.0) == 0.0);
    CHECK(d.demand_at(500.0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.qs_at(720.0) == 15.0);
    CHECK(d.qs_at(1080.0) == 0.0);

    const DemandProfile full(square(720.0, 1.0));
    const DemandProfile constant(DemandSpec{});
    for (double t = 0.0; t < 3000.0; t += 13.7) CHECK(full.demand_at(t) == constant.demand_at(t));
    CHECK(full.switch_times(0.0, 3000.0).empty());
}

TEST_CASE("switch times") {
    const DemandProfile d(square());
    CHECK(d.switch_times(0.0, 1440.0) == std::vector<double>{360.0, 720.0, 1080.0});
    CHECK(d.switch_times(360.0, 720.0).empty());
    CHECK(d.switch_times(359.0, 721.0) == std::vector<double>{360.0, 720.0});

    DemandSpec s;
    s.kind = DemandKind::Schedule;
    s.schedule = {{100.0, 0.5}, {200.0, 2.0}};
    const DemandProfile sch(s);
    CHECK(sch.switch_times(0.0, 150.0) == std::vector<double>{100.0});
    CHECK(sch.qs_at(50.0) == 15.0);
    CHECK(sch.qs_at(100.0) == 7.5);
    CHECK(sch.qs_at(250.0) == 30.0);
}

TEST_CASE("every discontinuity is a reported switch") {
    const DemandProfile d(square(500.0, 0.3));
    const auto sw = d.switch_times(0.0, 5000.0);
    double prev = d.qs_at(0.0);
    std::size_t found = 0;
    for (double t = 0.5; t < 5000.0; t += 0.5) {
        const double q = d.qs_at(t);
        if (q != prev) {
            REQUIRE(found < sw.size());
            CHECK(sw[found] > t - 0.5);
            CHECK(sw[found] <= t);
            ++found;
        }
        prev = q;
    }
    CHECK(found == sw.size());
}

TEST_CASE("integral over one period") {
    const DemandProfile d(square(720.0, 0.25));
    const int N = 720 * 64;
    const double h = 720.0 / N;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < N; ++i) sum += d.demand_at((i + 0.5) * h) * h;
    CHECK(km3hr_to_m3hr(sum(0)) == doctest::Approx(0.25 * 720.0 * 15.0).epsilon(1e-12));
    CHECK(km3hr_to_m3hr(sum(1)) == doctest::Approx(-0.25 * 720.0 * 15.0).epsilon(1e-12));
}

TEST_CASE("reference ramp") {
    const ReferenceProfile r(ReferenceSpec{});
    const auto a = r.reference_at(0.0);
    CHECK(a.r == std::vector<double>{0.0, 0.0});
    CHECK(a.r_dot == std::vector<double>{0.0, 0.0});
    for (double t : {4380.0, 5000.0, 1e6}) {
        const auto b = r.reference_at(t);
        CHECK(b.r[0] == 0.0);
        CHECK(b.r[1] == doctest::Approx(1.6094).epsilon(1e-4));
        CHECK(b.r[1] == std::log(5.0));
        CHECK(b.r_dot[1] == 0.0);
    }
    CHECK(r.reference_at(2190.0).r[1] == doctest::Approx(std::log(5.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("analytic reference slope matches finite differences") {
    const ReferenceProfile r(ReferenceSpec{});
    double worst_h = 0.0, worst_h2 = 0.0;
    for (double t = 10.0; t < 4370.0; t += 37.0) {
        auto fd = [&](double h) { return (r.reference_at(t + h).r[1] - r.reference_at(t - h).r[1]) / (2 * h); };
        const double exact = r.reference_at(t).r_dot[1];
        worst_h = std::max(worst_h, std::abs(fd(4.0) - exact));
        worst_h2 = std::max(worst_h2, std::abs(fd(2.0) - exact));
    }
    CHECK(worst_h < 1e-8);
    // second order: halving h cuts the error about 4x
    CHECK(worst_h2 < 0.3 * worst_h);
}

TEST_CASE("invalid scenario specs") {
    CHECK_THROWS_AS(DemandProfile(square(0.0)), ConfigError);
    CHECK_THROWS_AS(DemandProfile(square(720.0, 1.5)), ConfigError);
    DemandSpec s;
    s.schedule = {{10.0, 1.0}, {5.0, 1.0}};
    CHECK_THROWS_AS(DemandProfile{s}, ConfigError);
    ReferenceSpec ref;
    ref.ramp_hr = 0.0;
    CHECK_THROWS_AS(ReferenceProfile{ref}, ConfigError);
}
