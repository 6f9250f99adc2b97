#include "sustain/pollution.hpp"

#include "sustain/error.hpp"
#include "sustain/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sustain::pollution {
namespace {

void check_field(const std::vector<double>& f, std::size_t cells, const char* name) {
    if (f.empty()) return;
    if (f.size() != cells) {
        throw ValidationError(std::string(name) + " field has " + std::to_string(f.size()) +
                              " cells; the grid has " + std::to_string(cells));
    }
    for (double v : f) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string(name) + " field must be finite and non-negative");
        }
    }
}

} // namespace

void TransportConfig::validate() const {
    grid.validate();
    if (!std::isfinite(velocity)) throw ValidationError("velocity must be finite");
    if (!(diffusivity >= 0.0) || !std::isfinite(diffusivity)) {
        throw ValidationError("diffusivity must be non-negative and finite");
    }
    check_field(source, grid.cells, "source");
    check_field(removal, grid.cells, "removal");
}

CflReport cfl_check(const TransportConfig& config, double dt) {
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    const double dx = config.grid.dx();
    CflReport report{true, std::numeric_limits<double>::infinity(), "none"};
    if (config.velocity != 0.0) {
        report.max_dt = kCflSafety * dx / std::abs(config.velocity);
        report.binding = "advection";
    }
    if (config.diffusivity > 0.0) {
        const double diff = kCflSafety * dx * dx / (2.0 * config.diffusivity);
        if (diff < report.max_dt) {
            report.max_dt = diff;
            report.binding = "diffusion";
        }
    }
    report.ok = dt <= report.max_dt;
    return report;
}

ConcentrationField step_transport(const ConcentrationField& field, const TransportConfig& config, double dt) {
    const std::size_t n = config.grid.cells;
    if (field.values.size() != n) throw ValidationError("field and grid sizes differ");
    const CflReport cfl = cfl_check(config, dt);
    if (!cfl.ok) {
        std::ostringstream msg;
        msg << "time step " << dt << " violates the " << cfl.binding << " stability bound (max dt "
            << cfl.max_dt << ")";
        throw CflViolation(msg.str(), cfl.max_dt, cfl.binding);
    }

    const auto& k = simd::active_kernels();
    const double dx = config.grid.dx();
    const auto ghosted = with_ghosts(field.values, config.grid.boundary);

    std::vector<double> rate(n, 0.0);
    std::vector<double> scratch(n);
    if (config.diffusivity > 0.0) {
        k.laplacian(scratch.data(), ghosted.data(), 1.0 / (dx * dx), n);
        k.axpy(rate.data(), rate.data(), config.diffusivity, scratch.data(), n);
    }
    if (config.velocity != 0.0) {
        k.upwind(scratch.data(), ghosted.data(), config.velocity / dx, n);
        k.axpy(rate.data(), rate.data(), -1.0, scratch.data(), n);
    }
    if (!config.source.empty()) k.axpy(rate.data(), rate.data(), 1.0, config.source.data(), n);
    if (!config.removal.empty()) k.axpy(rate.data(), rate.data(), -1.0, config.removal.data(), n);
    if (config.reaction) {
        for (std::size_t i = 0; i < n; ++i) {
            const double q = config.reaction(field.values[i]);
            if (!std::isfinite(q)) {
                throw IntegrationError("non-finite reaction term in cell " + std::to_string(i),
                                       field.time, field.values);
            }
            scratch[i] = q;
        }
        k.axpy(rate.data(), rate.data(), 1.0, scratch.data(), n);
    }

    ConcentrationField next{std::vector<double>(n), config.grid, field.time + dt, field.clamp_events};
    k.axpy(next.values.data(), field.values.data(), dt, rate.data(), n);
    next.clamp_events += k.clamp_nonnegative(next.values.data(), n);
    return next;
}

std::vector<ConcentrationField> simulate_transport(const TransportConfig& config,
                                                   const ConcentrationField& initial,
                                                   const TimeGrid& grid, std::size_t every) {
    config.validate();
    grid.validate();
    if (every == 0) throw ValidationError("snapshot cadence must be at least 1");
    if (initial.values.size() != config.grid.cells) throw ValidationError("initial field and grid sizes differ");
    for (double v : initial.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("initial field must be finite and non-negative");
    }
    const std::size_t n = grid.steps();
    if (n > kMaxSteps) throw ValidationError("transport run exceeds the step limit");
    if (const CflReport cfl = cfl_check(config, grid.step); !cfl.ok) {
        std::ostringstream msg;
        msg << "time step " << grid.step << " violates the " << cfl.binding
            << " stability bound (max dt " << cfl.max_dt << ")";
        throw CflViolation(msg.str(), cfl.max_dt, cfl.binding);
    }

    ConcentrationField current = initial;
    current.grid = config.grid;
    current.time = grid.t0;
    std::vector<ConcentrationField> snapshots{current};
    for (std::size_t s = 0; s < n; ++s) {
        const double dt = grid.node(s + 1) - grid.node(s);
        current = step_transport(current, config, dt);
        current.time = grid.node(s + 1);
        if ((s + 1) % every == 0 || s + 1 == n) snapshots.push_back(current);
    }
    return snapshots;
}

double total_mass(const ConcentrationField& field) {
    return std::accumulate(field.values.begin(), field.values.end(), 0.0) * field.grid.dx();
}

double linear_reduction(double baseline, double rate) {
    if (!(baseline >= 0.0)) throw ValidationError("baseline emissions must be non-negative");
    if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("reduction rate must lie in [0, 1]");
    return baseline * (1.0 - rate);
}

CostCurve quadratic_cost(double c) {
    return {[c](double x) { return c * x * x; }, [c](double x) { return 2.0 * c * x; },
            [c](double lambda) { return lambda / (2.0 * c); }};
}

AbatementProblem AbatementProblem::quadratic(const std::vector<double>& baselines,
                                             const std::vector<double>& coefficients,
                                             const std::vector<double>& max_reductions, double cap) {
    if (baselines.size() != coefficients.size() || baselines.size() != max_reductions.size()) {
        throw ValidationError("abatement inputs differ in length");
    }
    AbatementProblem p;
    p.cap = cap;
    for (std::size_t i = 0; i < baselines.size(); ++i) {
        if (!(coefficients[i] > 0.0)) throw ValidationError("cost coefficients must be positive");
        p.sources.push_back({baselines[i], max_reductions[i], quadratic_cost(coefficients[i])});
    }
    return p;
}

void AbatementProblem::validate() const {
    if (sources.empty()) throw ValidationError("abatement problem needs at least one source");
    if (!(cap >= 0.0) || !std::isfinite(cap)) throw ValidationError("emission cap must be non-negative");
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto& s = sources[i];
        const std::string tag = "sources[" + std::to_string(i) + "]";
        if (!(s.baseline >= 0.0) || !std::isfinite(s.baseline)) {
            throw ValidationError(tag + " baseline must be non-negative");
        }
        if (!(s.max_reduction >= 0.0 && s.max_reduction <= s.baseline)) {
            throw ValidationError(tag + " max reduction must lie in [0, baseline]");
        }
        if (!s.cost.cost || !s.cost.marginal) throw ValidationError(tag + " cost curve missing");
    }
}

namespace {

// argmin_x C(x) - lambda x over [0, x_max] for a convex curve.
double best_response(const AbatementSource& s, double lambda) {
    if (s.max_reduction == 0.0) return 0.0;
    if (s.cost.inverse_marginal) return std::clamp(s.cost.inverse_marginal(lambda), 0.0, s.max_reduction);
    if (s.cost.marginal(0.0) >= lambda) return 0.0;
    if (s.cost.marginal(s.max_reduction) <= lambda) return s.max_reduction;
    double lo = 0.0, hi = s.max_reduction;
    for (int it = 0; it < 200 && lo < hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (s.cost.marginal(mid) < lambda ? lo : hi) = mid;
    }
    return hi;
}

double total_reduction(const AbatementProblem& p, double lambda, std::vector<double>* out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.sources.size(); ++i) {
        const double x = best_response(p.sources[i], lambda);
        if (out) (*out)[i] = x;
        sum += x;
    }
    return sum;
}

double cost_of(const AbatementProblem& p, const std::vector<double>& x) {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += p.sources[i].cost.cost(x[i]);
    return c;
}

} // namespace

AbatementSolution optimize_abatement(const AbatementProblem& problem) {
    problem.validate();
    const std::size_t n = problem.sources.size();
    double baseline = 0.0, max_cut = 0.0;
    for (const auto& s : problem.sources) {
        baseline += s.baseline;
        max_cut += s.max_reduction;
    }
    const double needed = baseline - problem.cap;

    AbatementSolution sol;
    sol.reductions.assign(n, 0.0);
    if (needed <= 0.0) {
        sol.total_cost = cost_of(problem, sol.reductions);
        return sol;
    }
    if (max_cut < needed) {
        const double min_emission = baseline - max_cut;
        std::ostringstream msg;
        msg.precision(17);
        msg << "infeasible: minimum achievable emission " << min_emission << " exceeds cap " << problem.cap;
        throw InfeasibleError(msg.str(), min_emission);
    }

    // Bracket the multiplier: at lo the cap is violated, at hi it is met.
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& s : problem.sources) {
        if (s.max_reduction > 0.0) hi = std::max(hi, s.cost.marginal(s.max_reduction));
    }
    std::vector<double> x(n);
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (total_reduction(problem, mid, &x) >= needed) {
            hi = mid;
        } else {
            lo = mid;
        }
        total_reduction(problem, hi, &x);
        sol.cost_history.push_back(cost_of(problem, x));
    }
    total_reduction(problem, hi, &x);
    sol.reductions = x;
    sol.multiplier = hi;
    sol.total_cost = cost_of(problem, x);
    return sol;
}

} // namespace sustain::pollution
