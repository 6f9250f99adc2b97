#include "sustain/energy.hpp"

#include "sustain/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sustain::energy {
namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(std::string(name) + " must be positive and finite");
    }
}

} // namespace

double eroei_static(double usable, double expended) {
    require_positive(usable, "usable energy");
    if (!(expended > 0.0)) throw ValidationError("energy expended must be positive");
    return usable / expended;
}

void EroeiParams::validate() const {
    require_positive(eta, "eta");
    require_positive(kappa, "kappa");
    require_positive(n, "n");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be non-negative and finite");
    require_positive(E_i0, "E_i0");
    require_positive(R_max, "R_max");
}

EroeiRates eroei_rhs(double R, const EroeiParams& p) {
    if (!(R >= 0.0)) throw ValidationError("remaining resource must be non-negative");
    EroeiRates out;
    out.output = R == 0.0 ? 0.0 : p.kappa * std::pow(R, p.n);
    out.investment = p.E_i0 + p.beta * (p.R_max - R);
    out.eroei = out.output / out.investment;
    out.dR_dt = -out.output / p.eta;
    return out;
}

EroeiTrajectory simulate_depletion(const EroeiParams& p, double R0, const TimeGrid& grid) {
    p.validate();
    if (!(R0 > 0.0 && R0 <= p.R_max)) throw ValidationError("R0 must lie in (0, R_max]");
    // Intermediate RK4 stages may undershoot zero; the rate is evaluated at max(R, 0).
    const Rhs rhs = [&p](double, std::span<const double> y, std::span<double> dydt) {
        dydt[0] = eroei_rhs(std::max(y[0], 0.0), p).dR_dt;
    };
    const double init[] = {R0};
    const Trajectory traj =
        integrate_ode(rhs, init, grid, {.method = Method::rk4, .clamp_nonnegative = true});

    EroeiTrajectory out;
    out.times = traj.times;
    out.clamp_events = traj.clamp_events;
    const std::size_t m = traj.size();
    out.resource.reserve(m);
    out.output.reserve(m);
    out.investment.reserve(m);
    out.eroei.reserve(m);
    for (const auto& s : traj.states) {
        const EroeiRates r = eroei_rhs(s[0], p);
        out.resource.push_back(s[0]);
        out.output.push_back(r.output);
        out.investment.push_back(r.investment);
        out.eroei.push_back(r.eroei);
    }
    return out;
}

double capacity_factor(double actual_output, double max_potential) {
    if (!(max_potential > 0.0)) throw ValidationError("maximum potential output must be positive");
    if (!(actual_output >= 0.0)) throw ValidationError("actual output must be non-negative");
    if (actual_output > max_potential) throw ValidationError("actual output exceeds maximum potential");
    return actual_output / max_potential;
}

double carbon_intensity(double emissions, double energy) {
    if (!(emissions >= 0.0)) throw ValidationError("emissions must be non-negative");
    if (!(energy > 0.0)) throw ValidationError("energy must be positive");
    return emissions / energy;
}

} // namespace sustain::energy
