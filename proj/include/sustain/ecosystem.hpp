#pragma once

#include "sustain/numerics.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Predator-prey dynamics: the classical two-species system and the
// resource-limited system with a law-of-the-minimum growth term.
namespace sustain::ecosystem {

struct SimpleEcoParams {
    double r = 0.0; // prey growth
    double c = 0.0; // predation
    double b = 0.0; // conversion
    double m = 0.0; // predator mortality

    void validate() const;
    bool operator==(const SimpleEcoParams&) const = default;
};

struct EcoState {
    double prey = 0.0;
    double predator = 0.0;
};

EcoState simple_rhs(const EcoState& s, const SimpleEcoParams& p);

// First integral V = b N1 - m ln N1 + c N2 - r ln N2; requires N1, N2 > 0.
double lv_conserved(const EcoState& s, const SimpleEcoParams& p);

// Populations are clamped at zero after each step.
Trajectory simulate_simple(const SimpleEcoParams& p, const EcoState& y0, const TimeGrid& grid);

// min_i R_i / K_i
double liebig_factor(std::span<const double> resources, std::span<const double> capacities);

// g(x, y, R) and phi_i(x, y, R_i); both must return finite non-negative values.
using PredationFn = std::function<double(double prey, double predator, std::span<const double> resources)>;
using DepletionFn = std::function<double(double prey, double predator, double resource)>;

struct Resource {
    double capacity = 0.0;   // K_i
    double supply = 0.0;     // S_i
    DepletionFn depletion;   // phi_i
};

struct GeneralizedEcoParams {
    double growth = 0.0;      // r_x
    double efficiency = 0.0;  // delta in (0, 1]
    double mortality = 0.0;   // m
    PredationFn predation;
    std::vector<Resource> resources;
    double noise_prey = 0.0;
    double noise_predator = 0.0;

    void validate() const;
};

// g = a x y
PredationFn mass_action_predation(double a);
// g = a x y / (1 + a h x)
PredationFn holling_type2_predation(double a, double handling);
// phi = e x R / K
DepletionFn prey_proportional_depletion(double e, double capacity);
// phi = e R
DepletionFn linear_depletion(double e);

struct GeneralizedEcoState {
    double prey = 0.0;
    double predator = 0.0;
    std::vector<double> resources;

    // [prey, predator, R_1, ..., R_n]
    State flatten() const;
};

// Deterministic drift [dx, dy, dR_1, ..., dR_n].
State generalized_rhs(const GeneralizedEcoState& s, const GeneralizedEcoParams& p);

// Euler-Maruyama path with additive noise on prey and predator only;
// every component is clamped at zero after each step.
Trajectory simulate_generalized(const GeneralizedEcoParams& p, const GeneralizedEcoState& y0,
                                const TimeGrid& grid, std::uint64_t seed);

} // namespace sustain::ecosystem
