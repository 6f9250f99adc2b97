#include "sustain/ecosystem.hpp"

#include "sustain/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sustain::ecosystem {
namespace {

void require_positive(double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name + " must be positive and finite");
}

void require_nonnegative(double v, const std::string& name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(name + " must be non-negative and finite");
}

void check_rate(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
        throw Error(std::string(what) + " returned " + std::to_string(v) +
                    "; it must be finite and non-negative");
    }
}

} // namespace

void SimpleEcoParams::validate() const {
    require_positive(r, "r");
    require_positive(c, "c");
    require_positive(b, "b");
    require_positive(m, "m");
}

EcoState simple_rhs(const EcoState& s, const SimpleEcoParams& p) {
    return {p.r * s.prey - p.c * s.prey * s.predator, p.b * s.prey * s.predator - p.m * s.predator};
}

double lv_conserved(const EcoState& s, const SimpleEcoParams& p) {
    if (!(s.prey > 0.0) || !(s.predator > 0.0)) {
        throw ValidationError("conserved quantity needs strictly positive populations");
    }
    return p.b * s.prey - p.m * std::log(s.prey) + p.c * s.predator - p.r * std::log(s.predator);
}

Trajectory simulate_simple(const SimpleEcoParams& p, const EcoState& y0, const TimeGrid& grid) {
    p.validate();
    require_nonnegative(y0.prey, "initial prey");
    require_nonnegative(y0.predator, "initial predator");
    const Rhs rhs = [p](double, std::span<const double> y, std::span<double> dydt) {
        const EcoState d = simple_rhs({y[0], y[1]}, p);
        dydt[0] = d.prey;
        dydt[1] = d.predator;
    };
    const double init[] = {y0.prey, y0.predator};
    return integrate_ode(rhs, init, grid, {.method = Method::rk4, .clamp_nonnegative = true});
}

double liebig_factor(std::span<const double> resources, std::span<const double> capacities) {
    if (resources.empty()) throw ValidationError("liebig factor needs at least one resource");
    if (resources.size() != capacities.size()) {
        throw ValidationError("resource and capacity vectors differ in length");
    }
    double f = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < resources.size(); ++i) {
        if (!(capacities[i] > 0.0)) throw ValidationError("resource capacities must be positive");
        f = std::min(f, resources[i] / capacities[i]);
    }
    return f;
}

PredationFn mass_action_predation(double a) {
    return [a](double x, double y, std::span<const double>) { return a * x * y; };
}

PredationFn holling_type2_predation(double a, double handling) {
    return [a, handling](double x, double y, std::span<const double>) {
        return a * x * y / (1.0 + a * handling * x);
    };
}

DepletionFn prey_proportional_depletion(double e, double capacity) {
    return [e, capacity](double x, double, double r) { return e * x * (r / capacity); };
}

DepletionFn linear_depletion(double e) {
    return [e](double, double, double r) { return e * r; };
}

void GeneralizedEcoParams::validate() const {
    require_positive(growth, "r_x");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
    require_positive(mortality, "m");
    require_nonnegative(noise_prey, "noise_x");
    require_nonnegative(noise_predator, "noise_y");
    if (!predation) throw ValidationError("predation function missing");
    if (resources.empty()) throw ValidationError("at least one resource is required");
    for (std::size_t i = 0; i < resources.size(); ++i) {
        const std::string tag = "resources[" + std::to_string(i) + "]";
        require_positive(resources[i].capacity, tag + ".K");
        require_nonnegative(resources[i].supply, tag + ".S");
        if (!resources[i].depletion) throw ValidationError(tag + " depletion function missing");
    }
}

State GeneralizedEcoState::flatten() const {
    State out{prey, predator};
    out.insert(out.end(), resources.begin(), resources.end());
    return out;
}

namespace {

void drift_into(std::span<const double> y, const GeneralizedEcoParams& p, std::span<double> out) {
    const double x = y[0];
    const double pred = y[1];
    const auto res = y.subspan(2);
    double limit = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < res.size(); ++i) limit = std::min(limit, res[i] / p.resources[i].capacity);
    const double g = p.predation(x, pred, res);
    check_rate(g, "predation");
    out[0] = p.growth * x * limit - g;
    out[1] = p.efficiency * g - p.mortality * pred;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const double phi = p.resources[i].depletion(x, pred, res[i]);
        check_rate(phi, "depletion");
        out[2 + i] = p.resources[i].supply - phi;
    }
}

} // namespace

State generalized_rhs(const GeneralizedEcoState& s, const GeneralizedEcoParams& p) {
    if (s.resources.size() != p.resources.size()) {
        throw ValidationError("state and parameters disagree on the number of resources");
    }
    const State y = s.flatten();
    for (double v : y) {
        if (!(v >= 0.0)) throw ValidationError("ecosystem state must be non-negative");
    }
    State out(y.size());
    drift_into(y, p, out);
    return out;
}

Trajectory simulate_generalized(const GeneralizedEcoParams& p, const GeneralizedEcoState& y0,
                                const TimeGrid& grid, std::uint64_t seed) {
    p.validate();
    const State init = y0.flatten();
    if (y0.resources.size() != p.resources.size()) {
        throw ValidationError("initial state and parameters disagree on the number of resources");
    }
    for (double v : init) {
        if (!(v >= 0.0)) throw ValidationError("initial ecosystem state must be non-negative");
    }
    const Rhs drift = [&p](double, std::span<const double> y, std::span<double> out) {
        drift_into(y, p, out);
    };
    const NoiseAmplitude amplitude = [&p](double, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        out[0] = p.noise_prey;
        out[1] = p.noise_predator;
    };
    return euler_maruyama(drift, amplitude, init, grid, seed, true);
}

} // namespace sustain::ecosystem
