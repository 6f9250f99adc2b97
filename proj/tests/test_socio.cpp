#include "doctest.h"

#include "oracles.hpp"
#include "sustain/error.hpp"
#include "sustain/socio.hpp"

#include <cmath>

using namespace sustain;
using namespace sustain::socio;

namespace {

ControlProblem toy_problem(double D = 0.05, double alpha = 0.1) {
    ControlProblem p;
    p.diffusivity = D;
    p.growth = logistic_growth(1.0, 2.0);
    p.alpha = alpha;
    p.horizon = {0.0, 1.0, 1.0 / 32};
    p.domain = {0.0, 1.0, 16, Boundary::zero_flux};
    for (std::size_t i = 0; i < 16; ++i) {
        const double x = p.domain.center(i);
        p.initial.push_back(0.4 + 1.2 * std::exp(-std::pow((x - 0.3) / 0.15, 2)));
    }
    return p;
}

ControlField random_control(const ControlProblem& p, double budget, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    auto c = ControlField::zeros(p, budget);
    for (auto& v : c.values()) v = oracle::uniform(g, 0.0, 0.5);
    project_budget(c, p.domain.dx());
    return c;
}

double objective(const ControlProblem& p, const ControlField& c) {
    return control_objective(p, c, forward_crime_pde(p, c));
}

double node_weight(const ControlProblem& p, std::size_t k) {
    const std::size_t n = p.horizon.steps();
    double w = 0.0;
    if (k > 0) w += 0.5 * (p.horizon.node(k) - p.horizon.node(k - 1));
    if (k < n) w += 0.5 * (p.horizon.node(k + 1) - p.horizon.node(k));
    return w * p.domain.dx();
}

} // namespace

TEST_CASE("crime_ode_rhs examples") {
    const auto zero = CrimeInputs::constant(0, 0, 0);
    CHECK(crime_ode_rhs(0, 0, {0.3, 1, 1, 1}, zero) == 0.0);
    CHECK(crime_ode_rhs(10, 0, {0.1, 1, 1, 1}, CrimeInputs::constant(1, 3, 2)) == doctest::Approx(-3.0));
    const CrimeOdeParams p{-0.7, 0.4, 0.9, 1.3};
    const auto eq = crime_equilibrium(p, 2.0, 0.5, 1.5);
    CHECK(std::abs(crime_ode_rhs(eq.x_star, 0, p, CrimeInputs::constant(2.0, 0.5, 1.5))) < 1e-14);
}

TEST_CASE("crime_equilibrium examples") {
    const auto s = crime_equilibrium({-0.5, 0, 0, 0}, 0, 0, 0);
    CHECK(s.x_star == 0.0);
    CHECK(s.stable);
    const auto u = crime_equilibrium({0.5, 0, 0, 0}, 0, 0, 0);
    CHECK(u.x_star == 0.0);
    CHECK(!u.stable);
    CHECK_THROWS_AS(crime_equilibrium({0, 1, 1, 1}, 1, 1, 1), ValidationError);
    CHECK_THROWS_AS(crime_equilibrium({1, -1, 1, 1}, 1, 1, 1), ValidationError);
}

TEST_CASE("simulate_crime_ode examples") {
    const CrimeOdeParams p{-0.5, 0.2, 0.3, 1.0};
    const auto in = CrimeInputs::constant(3.0, 1.0, 2.0);
    const double xs = crime_equilibrium(p, 3.0, 1.0, 2.0).x_star;
    for (const auto& s : simulate_crime_ode(p, in, xs, {0, 10, 0.01}).states) {
        CHECK(s[0] == doctest::Approx(xs).epsilon(1e-10));
    }

    const auto conv = simulate_crime_ode(p, in, xs + 3.0, {0, 10, 0.01});
    const double e1 = std::log(std::abs(conv.states[200][0] - xs));
    const double e2 = std::log(std::abs(conv.states[800][0] - xs));
    const double slope = (e2 - e1) / (conv.times[800] - conv.times[200]);
    CHECK(slope == doctest::Approx(p.a).epsilon(0.05));

    const CrimeOdeParams up{0.5, 0.2, 0.3, 1.0};
    const auto calm = CrimeInputs::constant(0.1, 1.0, 2.0);
    const double xu = crime_equilibrium(up, 0.1, 1.0, 2.0).x_star;
    REQUIRE(xu > 0.0);
    const auto grow = simulate_crime_ode(up, calm, xu + 1.0, {0, 10, 0.01});
    CHECK(grow.back()[0] > 10 * (xu + 1.0));
}

TEST_CASE("crime ODE superposition") {
    const CrimeOdeParams p{-0.3, 0.5, 0.7, 1.1};
    const CrimeInputs a{[](double t) { return 1 + std::sin(t); }, [](double t) { return 0.5 * t; },
                        [](double) { return 0.2; }};
    const CrimeInputs b{[](double) { return 0.3; }, [](double t) { return std::exp(-t); },
                        [](double t) { return t * t / 10; }};
    const CrimeInputs sum{[&](double t) { return a.unemployment(t) + b.unemployment(t); },
                          [&](double t) { return a.police(t) + b.police(t); },
                          [&](double t) { return a.trust(t) + b.trust(t); }};
    const auto zero = CrimeInputs::constant(0, 0, 0);
    // Large x0 keeps every path positive so the clamp never engages.
    const TimeGrid grid{0, 3, 0.01};
    const double x0 = 40.0;
    const auto ra = simulate_crime_ode(p, a, x0, grid);
    const auto rb = simulate_crime_ode(p, b, x0, grid);
    const auto rs = simulate_crime_ode(p, sum, x0, grid);
    const auto r0 = simulate_crime_ode(p, zero, x0, grid);
    for (std::size_t k = 0; k < rs.size(); ++k) {
        CHECK(rs.states[k][0] == doctest::Approx(ra.states[k][0] + rb.states[k][0] - r0.states[k][0]).epsilon(1e-8));
    }
}

TEST_CASE("forward_crime_pde examples") {
    ControlProblem p = toy_problem();
    p.initial.assign(16, 0.0);
    const auto none = ControlField::zeros(p, 1.0);
    for (const auto& f : forward_crime_pde(p, none).fields) {
        for (double v : f) CHECK(v == 0.0);
    }

    ControlProblem q = toy_problem(0.0);
    q.horizon = {0.0, 1.0, 1e-5};
    const auto evo = forward_crime_pde(q, ControlField::zeros(q, 1.0));
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(evo.fields.back()[i] == doctest::Approx(oracle::logistic(q.initial[i], 1.0, 2.0, 1.0)).epsilon(1e-5));
    }

    ControlProblem r = toy_problem();
    auto heavy = ControlField::zeros(r, 100.0);
    std::fill(heavy.values().begin(), heavy.values().end(), 50.0);
    const auto crushed = forward_crime_pde(r, heavy);
    for (double v : crushed.fields.back()) CHECK(v == 0.0);
    CHECK(crushed.clamp_events > 0);
}

TEST_CASE("forward_crime_pde checks shapes and stability") {
    ControlProblem p = toy_problem();
    CHECK_THROWS_AS(forward_crime_pde(p, ControlField(3, 16, 1.0)), ValidationError);
    p.diffusivity = 10.0;
    CHECK_THROWS_AS(forward_crime_pde(p, ControlField::zeros(p, 1.0)), CflViolation);
}

TEST_CASE("control_objective examples") {
    ControlProblem p = toy_problem();
    p.initial.assign(16, 0.0);
    CHECK(control_objective(p, ControlField::zeros(p, 1.0), forward_crime_pde(p, ControlField::zeros(p, 1.0))) == 0.0);

    ControlProblem q = toy_problem();
    CrimeEvolution constant;
    constant.fields.assign(q.nodes(), std::vector<double>(16, 1.5));
    CHECK(control_objective(q, ControlField::zeros(q, 1.0), constant) ==
          doctest::Approx(1.5 * 1.5 * 1.0 * 1.0).epsilon(1e-10));

    const auto c = random_control(q, 1.0, 3);
    const auto evo = forward_crime_pde(q, c);
    ControlProblem q2 = q;
    q2.alpha = 2 * q.alpha;
    double pp = 0.0;
    for (std::size_t k = 0; k < q.nodes(); ++k) {
        for (std::size_t i = 0; i < 16; ++i) pp += node_weight(q, k) * c.at(k, i) * c.at(k, i);
    }
    CHECK(control_objective(q2, c, evo) - control_objective(q, c, evo) == doctest::Approx(q.alpha * pp).epsilon(1e-10));
}

TEST_CASE("adjoint gradient with no crime is 2 alpha P") {
    ControlProblem p = toy_problem();
    p.initial.assign(16, 0.0);
    const auto c = random_control(p, 1.0, 5);
    const auto g = adjoint_gradient(p, c);
    for (std::size_t j = 0; j < c.values().size(); ++j) CHECK(g.values()[j] == 2 * p.alpha * c.values()[j]);
}

TEST_CASE("adjoint gradient matches central finite differences") {
    const ControlProblem p = toy_problem();
    const auto c = random_control(p, 1.0, 9);
    const auto g = adjoint_gradient(p, c);
    std::mt19937_64 gen(13);
    double num = 0.0, den = 0.0;
    for (int s = 0; s < 20; ++s) {
        const std::size_t k = gen() % p.nodes();
        const std::size_t i = gen() % 16;
        const double eps = 1e-6;
        auto plus = c, minus = c;
        plus.at(k, i) += eps;
        minus.at(k, i) -= eps;
        const double fd = (objective(p, plus) - objective(p, minus)) / (2 * eps) / node_weight(p, k);
        CHECK(g.at(k, i) == doctest::Approx(fd).epsilon(1e-4));
        num += (g.at(k, i) - fd) * (g.at(k, i) - fd);
        den += fd * fd;
    }
    CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("gradient at zero policing is non-positive where crime is present") {
    const ControlProblem p = toy_problem();
    const auto g = adjoint_gradient(p, ControlField::zeros(p, 1.0));
    for (double v : g.values()) CHECK(v <= 0.0);
}

TEST_CASE("budget projection") {
    const double dx = 0.25;
    std::vector<double> feasible{0.5, 0.0, 1.0, 0.2};
    auto copy = feasible;
    project_budget(copy, dx, 1.0);
    CHECK(copy == feasible);

    std::vector<double> row{3.0, -1.0, 1.0, 2.0};
    project_budget(row, dx, 1.0);
    double sum = 0;
    for (double v : row) {
        CHECK(v >= 0.0);
        sum += v * dx;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Water level tau = 2/3 on (3, 0, 1, 2).
    CHECK(row[0] == doctest::Approx(7.0 / 3.0));
    CHECK(row[1] == 0.0);
    CHECK(row[2] == doctest::Approx(1.0 / 3.0));
    CHECK(row[3] == doctest::Approx(4.0 / 3.0));

    std::mt19937_64 g(21);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(12);
        for (auto& x : v) x = oracle::uniform(g, -2, 5);
        project_budget(v, 0.1, 0.8);
        auto again = v;
        project_budget(again, 0.1, 0.8);
        CHECK(again == v);
        double s = 0;
        for (double x : v) s += x * 0.1;
        CHECK(s <= 0.8 + 1e-12);
    }
}

TEST_CASE("optimize_police keeps iterates feasible and the objective non-increasing") {
    const ControlProblem p = toy_problem();
    auto init = ControlField::zeros(p, 0.3);
    const auto res = optimize_police(p, init, {.iterations = 60});
    REQUIRE(res.objective_history.size() >= 2);
    for (std::size_t i = 1; i < res.objective_history.size(); ++i) {
        CHECK(res.objective_history[i] <= res.objective_history[i - 1]);
    }
    CHECK(res.objective_history.back() < res.objective_history.front());
    CHECK(res.control.feasible(p.domain.dx(), 1e-8));
}

TEST_CASE("optimize_police limiting cases") {
    ControlProblem quiet = toy_problem();
    quiet.initial.assign(16, 0.0);
    const auto zero = optimize_police(quiet, random_control(quiet, 1.0, 4), {.iterations = 50});
    CHECK(zero.objective_history.back() < 1e-12);
    for (double v : zero.control.values()) CHECK(std::abs(v) < 1e-6);

    const ControlProblem costly = toy_problem(0.05, 1e6);
    const auto lazy = optimize_police(costly, ControlField::zeros(costly, 1.0), {.iterations = 50});
    double energy = 0.0;
    for (std::size_t k = 0; k < costly.nodes(); ++k) {
        for (std::size_t i = 0; i < 16; ++i) energy += node_weight(costly, k) * std::pow(lazy.control.at(k, i), 2);
    }
    // A budget-saturating uniform deployment has integral P_max^2 / L over the horizon.
    CHECK(energy < 1e-6 * 1.0);

    const ControlProblem tight = toy_problem(0.05, 1e-3);
    const double budget = 0.05;
    const auto res = optimize_police(tight, ControlField::zeros(tight, budget), {.iterations = 100});
    for (std::size_t k = 0; k + 1 < tight.nodes(); ++k) {
        double used = 0.0;
        for (std::size_t i = 0; i < 16; ++i) used += res.control.at(k, i) * tight.domain.dx();
        CHECK(used == doctest::Approx(budget).epsilon(1e-8));
    }
}

TEST_CASE("optimize_police rejects infeasible starts") {
    const ControlProblem p = toy_problem();
    auto c = ControlField::zeros(p, 0.1);
    std::fill(c.values().begin(), c.values().end(), 1.0);
    CHECK_THROWS_AS(optimize_police(p, c), ValidationError);
    c = ControlField::zeros(p, 0.1);
    c.at(0, 0) = -0.1;
    CHECK_THROWS_AS(optimize_police(p, c), ValidationError);
}

TEST_CASE("pgd status names") {
    CHECK(to_string(PgdStatus::converged) == "converged");
    CHECK(to_string(PgdStatus::stalled) == "stalled");
    CHECK(to_string(PgdStatus::max_iterations) == "max-iterations");
}
