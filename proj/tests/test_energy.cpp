#include "doctest.h"

#include "sustain/energy.hpp"
#include "sustain/error.hpp"

#include <cmath>

using namespace sustain;
using namespace sustain::energy;

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return s;
}

} // namespace

TEST_CASE("eroei_static examples") {
    CHECK(eroei_static(10, 1) == 10);
    CHECK(eroei_static(3, 3) == 1);
    CHECK_THROWS_AS(eroei_static(1, 0), ValidationError);
}

TEST_CASE("eroei_rhs examples") {
    const EroeiParams p{2.0, 1.0, 1.0, 0.0, 1.0, 50.0};
    const auto r = eroei_rhs(10, p);
    CHECK(r.dR_dt == -5.0);
    CHECK(r.eroei == 10.0);
    const auto empty = eroei_rhs(0, p);
    CHECK(empty.output == 0.0);
    CHECK(empty.dR_dt == 0.0);
    CHECK(empty.eroei == 0.0);
    const EroeiParams q{0.5, 0.3, 1.7, 0.2, 2.0, 40.0};
    const auto full = eroei_rhs(40, q);
    CHECK(full.investment == 2.0);
    CHECK(full.eroei == doctest::Approx(0.3 * std::pow(40.0, 1.7) / 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(eroei_rhs(-1, q), ValidationError);
}

TEST_CASE("linear depletion matches the analytic exponential") {
    const EroeiParams p{0.8, 0.2, 1.0, 0.0, 1.0, 100.0};
    const auto traj = simulate_depletion(p, 100.0, {0, 30, 0.01});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        CHECK(traj.resource[k] == doctest::Approx(100.0 * std::exp(-0.2 / 0.8 * traj.times[k])).epsilon(1e-6));
    }
}

TEST_CASE("depletion trajectory invariants") {
    const EroeiParams p{0.7, 0.005, 1.5, 0.03, 0.5, 100.0};
    const auto traj = simulate_depletion(p, 90.0, {0, 40, 0.01});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        CHECK(traj.resource[k] >= 0.0);
        if (k > 0) {
            CHECK(traj.resource[k] < traj.resource[k - 1]);
            CHECK(traj.eroei[k] < traj.eroei[k - 1]);
        }
        CHECK(traj.eroei[k] * traj.investment[k] == doctest::Approx(traj.output[k]).epsilon(1e-15));
    }
    const double extracted = p.eta * (traj.resource.front() - traj.resource.back());
    CHECK(trapezoid(traj.times, traj.output) == doctest::Approx(extracted).epsilon(1e-6));
}

TEST_CASE("doubling kappa equals halving eta for linear output") {
    const EroeiParams a{1.0, 0.4, 1.0, 0.0, 1.0, 10.0};
    const EroeiParams b{0.5, 0.2, 1.0, 0.0, 1.0, 10.0};
    const EroeiParams base{1.0, 0.2, 1.0, 0.0, 1.0, 10.0};
    const TimeGrid grid{0, 5, 0.01};
    const auto ta = simulate_depletion(a, 10.0, grid);
    const auto tb = simulate_depletion(b, 10.0, grid);
    const auto t0 = simulate_depletion(base, 10.0, grid);
    for (std::size_t k = 0; k < ta.times.size(); ++k) {
        CHECK(ta.resource[k] == doctest::Approx(tb.resource[k]).epsilon(1e-14));
    }
    // Same state, doubled kappa: output and eroei double pointwise.
    const auto r1 = eroei_rhs(t0.resource[100], base);
    const auto r2 = eroei_rhs(t0.resource[100], a);
    CHECK(r2.output == 2 * r1.output);
    CHECK(r2.eroei == 2 * r1.eroei);
}

TEST_CASE("exhaustion clamps at zero and output stops") {
    const EroeiParams p{0.1, 5.0, 0.5, 0.0, 1.0, 1.0};
    const auto traj = simulate_depletion(p, 1.0, {0, 5, 0.01});
    CHECK(traj.resource.back() == 0.0);
    CHECK(traj.output.back() == 0.0);
    for (double r : traj.resource) CHECK(r >= 0.0);
}

TEST_CASE("depletion inputs are validated") {
    const EroeiParams p{0.8, 0.2, 1.0, 0.0, 1.0, 100.0};
    CHECK_THROWS_AS(simulate_depletion(p, 0.0, {0, 1, 0.1}), ValidationError);
    CHECK_THROWS_AS(simulate_depletion(p, 101.0, {0, 1, 0.1}), ValidationError);
    EroeiParams bad = p;
    bad.beta = -1;
    CHECK_THROWS_AS(simulate_depletion(bad, 50.0, {0, 1, 0.1}), ValidationError);
}

TEST_CASE("capacity factor and carbon intensity") {
    CHECK(capacity_factor(0, 7) == 0);
    CHECK(capacity_factor(7, 7) == 1);
    CHECK(capacity_factor(25, 100) == 0.25);
    CHECK_THROWS_AS(capacity_factor(8, 7), ValidationError);
    CHECK(carbon_intensity(0, 3) == 0);
    CHECK(carbon_intensity(500, 1) == 500);
    CHECK_THROWS_AS(carbon_intensity(1, 0), ValidationError);
}
