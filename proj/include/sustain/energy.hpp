#pragma once

#include "sustain/numerics.hpp"

#include <vector>

// Energy-return accounting.
namespace sustain::energy {

// usable / expended
double eroei_static(double usable, double expended);

struct EroeiParams {
    double eta = 0.0;     // extraction efficiency
    double kappa = 0.0;   // output proportionality
    double n = 0.0;       // output nonlinearity
    double beta = 0.0;    // investment scaling, >= 0
    double E_i0 = 0.0;    // initial investment rate
    double R_max = 0.0;   // initial total resource

    void validate() const;
    bool operator==(const EroeiParams&) const = default;
};

struct EroeiRates {
    double dR_dt = 0.0;
    double output = 0.0;      // E_o = kappa R^n
    double investment = 0.0;  // E_i = E_i0 + beta (R_max - R)
    double eroei = 0.0;       // E_o / E_i
};

// dR/dt = -E_o / eta with the derived output, investment and ratio.
EroeiRates eroei_rhs(double R, const EroeiParams& p);

struct EroeiTrajectory {
    std::vector<double> times;
    std::vector<double> resource;
    std::vector<double> output;
    std::vector<double> investment;
    std::vector<double> eroei;
    std::size_t clamp_events = 0;
};

// RK4 on R with the resource clamped at zero; exhausted resources keep
// producing zero output.
EroeiTrajectory simulate_depletion(const EroeiParams& p, double R0, const TimeGrid& grid);

// actual / max_potential, in [0, 1].
double capacity_factor(double actual_output, double max_potential);

// emissions / energy
double carbon_intensity(double emissions, double energy);

} // namespace sustain::energy
