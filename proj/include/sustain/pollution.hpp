#pragma once

#include "sustain/numerics.hpp"

#include <functional>
#include <string>
#include <vector>

// Pollutant transport (advection, diffusion, sources, removal, reaction)
// and least-cost allocation of emission reductions under a cap.
namespace sustain::pollution {

// Q(C); any sign.
using Reaction = std::function<double(double concentration)>;

struct TransportConfig {
    double velocity = 0.0;
    double diffusivity = 0.0;
    std::vector<double> source;   // S(x) >= 0 per cell; empty means zero
    std::vector<double> removal;  // R_rem(x) >= 0 per cell; empty means zero
    Reaction reaction;            // empty means Q = 0
    SpatialGrid1D grid;

    void validate() const;
};

struct ConcentrationField {
    std::vector<double> values;
    SpatialGrid1D grid;
    double time = 0.0;
    // Cumulative count of cells reset to zero by the positivity clamp.
    std::size_t clamp_events = 0;
};

struct CflReport {
    bool ok = true;
    // Largest admissible step; +inf when nothing constrains it.
    double max_dt = 0.0;
    // "advection", "diffusion" or "none".
    std::string binding;
};

inline constexpr double kCflSafety = 0.9;

// ok iff dt <= 0.9 min(dx / |v|, dx^2 / (2 D)).
CflReport cfl_check(const TransportConfig& config, double dt);

// One explicit step of dC/dt = -v dC/dx + D d2C/dx2 + S - R_rem + Q(C).
// Throws CflViolation when dt exceeds the stability bound.
ConcentrationField step_transport(const ConcentrationField& field, const TransportConfig& config, double dt);

// Snapshots every `every` steps; the first is the initial field and the last
// is always the final state.
std::vector<ConcentrationField> simulate_transport(const TransportConfig& config,
                                                   const ConcentrationField& initial,
                                                   const TimeGrid& grid, std::size_t every = 1);

// sum(values) * dx
double total_mass(const ConcentrationField& field);

// E_c = E_0 (1 - R) for a reduction rate R in [0, 1].
double linear_reduction(double baseline, double rate);

// A convex, non-decreasing abatement cost curve and its derivative.
struct CostCurve {
    std::function<double(double)> cost;
    std::function<double(double)> marginal;
    // Closed-form inverse of the marginal, if one exists.
    std::function<double(double)> inverse_marginal;
};

// C(x) = c x^2
CostCurve quadratic_cost(double c);

struct AbatementSource {
    double baseline = 0.0;       // E_i
    double max_reduction = 0.0;  // x_max_i in [0, E_i]
    CostCurve cost;
};

struct AbatementProblem {
    std::vector<AbatementSource> sources;
    double cap = 0.0;  // E_limit

    void validate() const;
    // Quadratic-cost problem.
    static AbatementProblem quadratic(const std::vector<double>& baselines,
                                      const std::vector<double>& coefficients,
                                      const std::vector<double>& max_reductions, double cap);
};

struct AbatementSolution {
    std::vector<double> reductions;
    double total_cost = 0.0;
    // Shadow price of the cap.
    double multiplier = 0.0;
    // Total cost of the feasible iterate after each multiplier bisection step.
    std::vector<double> cost_history;
};

// Minimises sum C_i(x_i) subject to sum (E_i - x_i) <= E_limit, 0 <= x_i <= x_max_i,
// by bisection on the cap's multiplier. Throws InfeasibleError when even the
// maximum reductions leave emissions above the cap.
AbatementSolution optimize_abatement(const AbatementProblem& problem);

} // namespace sustain::pollution
