#include "sustain/socio.hpp"

#include "sustain/error.hpp"
#include "sustain/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace sustain::socio {

void CrimeOdeParams::validate() const {
    if (!std::isfinite(a)) throw ValidationError("a must be finite");
    if (!(b >= 0.0) || !std::isfinite(b)) throw ValidationError("b must be non-negative");
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("c must be non-negative");
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("d must be non-negative");
}

CrimeInputs CrimeInputs::constant(double unemployment, double police, double trust) {
    return {[unemployment](double) { return unemployment; }, [police](double) { return police; },
            [trust](double) { return trust; }};
}

double crime_ode_rhs(double x, double t, const CrimeOdeParams& p, const CrimeInputs& inputs) {
    return p.a * x - p.b * inputs.trust(t) - p.c * inputs.police(t) + p.d * inputs.unemployment(t);
}

CrimeEquilibrium crime_equilibrium(const CrimeOdeParams& p, double unemployment, double police,
                                   double trust) {
    p.validate();
    if (p.a == 0.0) throw ValidationError("a = 0: the crime model has no isolated equilibrium");
    return {(p.b * trust + p.c * police - p.d * unemployment) / p.a, p.a < 0.0};
}

Trajectory simulate_crime_ode(const CrimeOdeParams& p, const CrimeInputs& inputs, double x0,
                              const TimeGrid& grid) {
    p.validate();
    if (!inputs.unemployment || !inputs.police || !inputs.trust) {
        throw ValidationError("crime inputs must all be defined");
    }
    if (!(x0 >= 0.0)) throw ValidationError("initial crime level must be non-negative");
    const Rhs rhs = [&p, &inputs](double t, std::span<const double> y, std::span<double> dydt) {
        dydt[0] = crime_ode_rhs(y[0], t, p, inputs);
    };
    const double init[] = {x0};
    return integrate_ode(rhs, init, grid, {.method = Method::rk4, .clamp_nonnegative = true});
}

GrowthModel logistic_growth(double r, double K) {
    if (!(K > 0.0)) throw ValidationError("logistic capacity K must be positive");
    return {[r, K](double c) { return r * c * (1.0 - c / K); },
            [r, K](double c) { return r * (1.0 - 2.0 * c / K); }};
}

void ControlProblem::validate() const {
    horizon.validate();
    domain.validate();
    if (!(diffusivity >= 0.0) || !std::isfinite(diffusivity)) {
        throw ValidationError("diffusivity must be non-negative");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
    if (!growth.rate || !growth.derivative) throw ValidationError("growth model missing");
    if (initial.size() != domain.cells) throw ValidationError("initial crime field does not match the domain");
    for (double v : initial) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("initial crime field must be non-negative");
    }
    if (horizon.steps() > kMaxSteps) throw ValidationError("control horizon exceeds the step limit");
    if (diffusivity > 0.0) {
        const double dx = domain.dx();
        const double max_dt = 0.9 * dx * dx / (2.0 * diffusivity);
        if (horizon.step > max_dt) {
            std::ostringstream msg;
            msg << "time step " << horizon.step << " violates the diffusion stability bound (max dt "
                << max_dt << ")";
            throw CflViolation(msg.str(), max_dt, "diffusion");
        }
    }
}

ControlField::ControlField(std::size_t nodes, std::size_t cells, double budget)
    : nodes_(nodes), cells_(cells), budget_(budget), values_(nodes * cells, 0.0) {
    if (!(budget > 0.0)) throw ValidationError("police budget must be positive");
}

ControlField ControlField::zeros(const ControlProblem& problem, double budget) {
    return ControlField(problem.nodes(), problem.domain.cells, budget);
}

bool ControlField::feasible(double dx, double tol) const {
    for (std::size_t k = 0; k < nodes_; ++k) {
        const auto r = row(k);
        double sum = 0.0;
        for (double v : r) {
            if (!(v >= 0.0)) return false;
            sum += v;
        }
        if (sum * dx > budget_ + tol) return false;
    }
    return true;
}

namespace {

void check_shapes(const ControlProblem& problem, const ControlField& control) {
    if (control.nodes() != problem.nodes() || control.cells() != problem.domain.cells) {
        std::ostringstream msg;
        msg << "control field is " << control.nodes() << "x" << control.cells() << " but the problem needs "
            << problem.nodes() << "x" << problem.domain.cells;
        throw ValidationError(msg.str());
    }
}

// Trapezoid weights over the horizon nodes.
std::vector<double> time_weights(const TimeGrid& grid) {
    const std::size_t n = grid.steps();
    std::vector<double> w(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = grid.node(k + 1) - grid.node(k);
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    return w;
}

// Pre-clamp update C + h (D L C + R(C) - P) for one step.
void euler_update(const ControlProblem& problem, std::span<const double> c, std::span<const double> p,
                  double h, std::vector<double>& out, std::vector<double>& scratch) {
    const auto& k = simd::active_kernels();
    const std::size_t n = c.size();
    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) rate[i] = problem.growth.rate(c[i]) - p[i];
    if (problem.diffusivity > 0.0) {
        const double dx = problem.domain.dx();
        const auto g = with_ghosts(c, problem.domain.boundary);
        k.laplacian(scratch.data(), g.data(), 1.0 / (dx * dx), n);
        k.axpy(rate.data(), rate.data(), problem.diffusivity, scratch.data(), n);
    }
    k.axpy(out.data(), c.data(), h, rate.data(), n);
}

} // namespace

CrimeEvolution forward_crime_pde(const ControlProblem& problem, const ControlField& control) {
    problem.validate();
    check_shapes(problem, control);
    const std::size_t n = problem.domain.cells;
    const std::size_t steps = problem.horizon.steps();
    const auto& k = simd::active_kernels();

    CrimeEvolution out;
    out.fields.reserve(steps + 1);
    out.fields.push_back(problem.initial);
    std::vector<double> next(n), scratch(n);
    for (std::size_t s = 0; s < steps; ++s) {
        const double h = problem.horizon.node(s + 1) - problem.horizon.node(s);
        euler_update(problem, out.fields.back(), control.row(s), h, next, scratch);
        for (double v : next) {
            if (!std::isfinite(v)) {
                throw IntegrationError("non-finite crime density", problem.horizon.node(s), out.fields.back());
            }
        }
        out.clamp_events += k.clamp_nonnegative(next.data(), n);
        out.fields.push_back(next);
    }
    return out;
}

double control_objective(const ControlProblem& problem, const ControlField& control,
                         const CrimeEvolution& crime) {
    check_shapes(problem, control);
    if (crime.fields.size() != problem.nodes()) throw ValidationError("crime history length mismatch");
    const auto w = time_weights(problem.horizon);
    const double dx = problem.domain.dx();
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        double node = 0.0;
        const auto p = control.row(k);
        const auto& c = crime.fields[k];
        for (std::size_t i = 0; i < c.size(); ++i) node += c[i] * c[i] + problem.alpha * p[i] * p[i];
        total += w[k] * node * dx;
    }
    return total;
}

ControlField adjoint_gradient(const ControlProblem& problem, const ControlField& control) {
    const CrimeEvolution crime = forward_crime_pde(problem, control);
    const std::size_t n = problem.domain.cells;
    const std::size_t steps = problem.horizon.steps();
    const double dx = problem.domain.dx();
    const auto w = time_weights(problem.horizon);

    ControlField grad(control.nodes(), n, control.budget());

    // lambda^k = dJ/dC^k through all later steps; the discrete Laplacian is
    // symmetric for every boundary rule, so it is its own transpose.
    std::vector<double> lambda(n), mu(n), pre(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) lambda[i] = 2.0 * w[steps] * dx * crime.fields[steps][i];
    for (std::size_t s = steps; s-- > 0;) {
        const double h = problem.horizon.node(s + 1) - problem.horizon.node(s);
        const auto& c = crime.fields[s];
        euler_update(problem, c, control.row(s), h, pre, scratch);
        for (std::size_t i = 0; i < n; ++i) mu[i] = pre[i] > 0.0 ? lambda[i] : 0.0;
        for (std::size_t i = 0; i < n; ++i) grad.at(s, i) = -h * mu[i];

        std::vector<double> back(n);
        for (std::size_t i = 0; i < n; ++i) back[i] = problem.growth.derivative(c[i]) * mu[i];
        if (problem.diffusivity > 0.0) {
            const auto lap = laplacian_1d(mu, dx, problem.domain.boundary);
            for (std::size_t i = 0; i < n; ++i) back[i] += problem.diffusivity * lap[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            lambda[i] = 2.0 * w[s] * dx * c[i] + mu[i] + h * back[i];
        }
    }
    for (std::size_t k = 0; k <= steps; ++k) {
        const double scale = 1.0 / (w[k] * dx);
        for (std::size_t i = 0; i < n; ++i) {
            grad.at(k, i) = 2.0 * problem.alpha * control.at(k, i) + grad.at(k, i) * scale;
        }
    }
    return grad;
}

void project_budget(std::span<double> row, double dx, double budget) {
    double sum = 0.0;
    for (double& v : row) {
        v = std::max(v, 0.0);
        sum += v;
    }
    // Rows already within rounding of the budget are left alone, so projecting twice changes nothing.
    const double target = budget / dx;
    if (sum <= target * (1.0 + 1e-12)) return;

    // Water-filling: find tau with sum max(v - tau, 0) = target.
    std::vector<double> sorted(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        prefix += sorted[j];
        const double candidate = (prefix - target) / static_cast<double>(j + 1);
        if (j + 1 == sorted.size() || sorted[j + 1] <= candidate) {
            tau = candidate;
            break;
        }
    }
    for (double& v : row) v = std::max(v - tau, 0.0);
}

void project_budget(ControlField& control, double dx) {
    for (std::size_t k = 0; k < control.nodes(); ++k) project_budget(control.row(k), dx, control.budget());
}

std::string_view to_string(PgdStatus s) {
    switch (s) {
    case PgdStatus::max_iterations: return "max-iterations";
    case PgdStatus::converged: return "converged";
    case PgdStatus::stalled: return "stalled";
    }
    return "unknown";
}

PoliceResult optimize_police(const ControlProblem& problem, const ControlField& initial,
                             const PgdSettings& settings) {
    problem.validate();
    check_shapes(problem, initial);
    const double dx = problem.domain.dx();
    if (!initial.feasible(dx)) throw ValidationError("initial police deployment violates the budget or sign constraint");
    if (!(settings.initial_step > 0.0) || !(settings.shrink > 0.0 && settings.shrink < 1.0)) {
        throw ValidationError("invalid projected-gradient step rule");
    }

    const auto objective = [&](const ControlField& p) {
        return control_objective(problem, p, forward_crime_pde(problem, p));
    };

    const std::size_t n = problem.domain.cells;
    std::vector<double> weight = time_weights(problem.horizon);
    for (double& v : weight) v *= dx;

    PoliceResult result{initial, {}, PgdStatus::max_iterations};
    double current = objective(result.control);
    result.objective_history.push_back(current);
    double step = settings.initial_step;

    for (std::size_t it = 0; it < settings.iterations; ++it) {
        const ControlField grad = adjoint_gradient(problem, result.control);
        const auto& p = result.control.values();
        const auto& g = grad.values();

        bool accepted = false;
        ControlField trial = result.control;
        double trial_value = current;
        double moved = 0.0;
        for (std::size_t bt = 0; bt <= settings.max_backtracks; ++bt) {
            auto& q = trial.values();
            for (std::size_t j = 0; j < q.size(); ++j) q[j] = p[j] - step * g[j];
            project_budget(trial, dx);
            double lin = 0.0;
            moved = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                const double d = q[j] - p[j];
                const double wj = weight[j / n];
                lin += wj * g[j] * d;
                moved += wj * d * d;
            }
            if (moved == 0.0) {
                accepted = true;
                trial_value = current;
                break;
            }
            trial_value = objective(trial);
            if (trial_value <= current + lin + moved / (2.0 * step) && trial_value <= current) {
                accepted = true;
                break;
            }
            step *= settings.shrink;
        }

        if (!accepted) {
            result.status = PgdStatus::stalled;
            break;
        }
        const double decrease = current - trial_value;
        result.control = std::move(trial);
        current = trial_value;
        result.objective_history.push_back(current);
        if (moved == 0.0 ||
            (settings.tolerance > 0.0 && decrease <= settings.tolerance * std::max(std::abs(current), 1e-300))) {
            result.status = PgdStatus::converged;
            break;
        }
        step /= settings.shrink;
    }
    return result;
}

} // namespace sustain::socio
