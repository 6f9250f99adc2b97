#pragma once

#include "sustain/numerics.hpp"

#include <functional>
#include <span>
#include <string_view>
#include <vector>

// Crime dynamics: a linear ODE driven by socioeconomic inputs, and a
// reaction-diffusion model of crime density with optimal police deployment.
namespace sustain::socio {

struct CrimeOdeParams {
    double a = 0.0;  // natural growth rate, any sign
    double b = 0.0;  // sensitivity to community trust
    double c = 0.0;  // sensitivity to police presence
    double d = 0.0;  // sensitivity to unemployment

    void validate() const;
    bool operator==(const CrimeOdeParams&) const = default;
};

using TimeSeriesFn = std::function<double(double t)>;

struct CrimeInputs {
    TimeSeriesFn unemployment;  // u1
    TimeSeriesFn police;        // u2
    TimeSeriesFn trust;         // T_trust

    static CrimeInputs constant(double unemployment, double police, double trust);
};

// a x - b T_trust(t) - c u2(t) + d u1(t)
double crime_ode_rhs(double x, double t, const CrimeOdeParams& p, const CrimeInputs& inputs);

struct CrimeEquilibrium {
    double x_star = 0.0;
    bool stable = false;
};

// x* = (b T + c u2 - d u1) / a, stable iff a < 0. a == 0 has no isolated equilibrium.
CrimeEquilibrium crime_equilibrium(const CrimeOdeParams& p, double unemployment, double police,
                                   double trust);

// RK4 with the crime level clamped at zero.
Trajectory simulate_crime_ode(const CrimeOdeParams& p, const CrimeInputs& inputs, double x0,
                              const TimeGrid& grid);

// Intrinsic growth R(C) and its derivative.
struct GrowthModel {
    std::function<double(double)> rate;
    std::function<double(double)> derivative;
};

// r C (1 - C / K)
GrowthModel logistic_growth(double r, double K);

struct ControlProblem {
    double diffusivity = 0.0;
    GrowthModel growth;
    double alpha = 1.0;
    TimeGrid horizon;
    SpatialGrid1D domain;
    std::vector<double> initial;  // C0 per cell

    void validate() const;
    std::size_t nodes() const { return horizon.steps() + 1; }
};

// P(x, t) on time nodes x cells, row-major by time node.
class ControlField {
public:
    ControlField() = default;
    ControlField(std::size_t nodes, std::size_t cells, double budget);

    static ControlField zeros(const ControlProblem& problem, double budget);

    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t cells() const noexcept { return cells_; }
    double budget() const noexcept { return budget_; }

    std::span<double> row(std::size_t k) { return {values_.data() + k * cells_, cells_}; }
    std::span<const double> row(std::size_t k) const { return {values_.data() + k * cells_, cells_}; }
    double& at(std::size_t k, std::size_t i) { return values_[k * cells_ + i]; }
    double at(std::size_t k, std::size_t i) const { return values_[k * cells_ + i]; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    // P >= 0 and sum_i P dx <= budget + tol at every node.
    bool feasible(double dx, double tol = 1e-8) const;

private:
    std::size_t nodes_ = 0;
    std::size_t cells_ = 0;
    double budget_ = 0.0;
    std::vector<double> values_;
};

struct CrimeEvolution {
    std::vector<std::vector<double>> fields;  // one per time node
    std::size_t clamp_events = 0;
};

// Explicit Euler on dC/dt = D d2C/dx2 + R(C) - P, clamped at zero.
CrimeEvolution forward_crime_pde(const ControlProblem& problem, const ControlField& control);

// Trapezoid in time, midpoint in space, of C^2 + alpha P^2.
double control_objective(const ControlProblem& problem, const ControlField& control,
                         const CrimeEvolution& crime);

// Gradient of the discrete objective from one backward sweep, expressed in
// the quadrature inner product <a, b> = sum_k w_k dx sum_i a_ki b_ki: the
// partial derivative with respect to P(k, i) equals w_k dx times entry (k, i).
// With no crime it is exactly 2 alpha P.
ControlField adjoint_gradient(const ControlProblem& problem, const ControlField& control);

// Euclidean projection of one time node onto {P >= 0, sum P dx <= budget}.
void project_budget(std::span<double> row, double dx, double budget);

// Every row of the field.
void project_budget(ControlField& control, double dx);

struct PgdSettings {
    std::size_t iterations = 200;
    double initial_step = 1.0;
    double shrink = 0.5;
    std::size_t max_backtracks = 60;
    // Stop once the relative objective decrease falls below this; 0 runs every iteration.
    double tolerance = 0.0;
};

enum class PgdStatus { max_iterations, converged, stalled };

std::string_view to_string(PgdStatus s);

struct PoliceResult {
    ControlField control;
    // Objective at the initial control followed by one entry per iteration.
    std::vector<double> objective_history;
    PgdStatus status = PgdStatus::max_iterations;
};

// Projected gradient descent with backtracking on the sufficient-decrease
// condition, so the objective history never increases.
PoliceResult optimize_police(const ControlProblem& problem, const ControlField& initial,
                             const PgdSettings& settings = {});

} // namespace sustain::socio
