#include "sustain/climate.hpp"

#include "sustain/error.hpp"

#include <cmath>
#include <numeric>

namespace sustain::climate {
namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(std::string("Lorenz parameter ") + name + " must be positive and finite");
    }
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

void LorenzParams::validate() const {
    require_positive(sigma, "sigma");
    require_positive(rho, "rho");
    require_positive(beta, "beta");
}

double LorenzState::norm() const { return std::sqrt(x * x + y * y + z * z); }

LorenzState lorenz_rhs(const LorenzState& s, const LorenzParams& p) {
    return {p.sigma * (s.y - s.x), s.x * (p.rho - s.z) - s.y, s.x * s.y - p.beta * s.z};
}

Rhs lorenz_system(const LorenzParams& p) {
    return [p](double, std::span<const double> y, std::span<double> dydt) {
        const LorenzState d = lorenz_rhs({y[0], y[1], y[2]}, p);
        dydt[0] = d.x;
        dydt[1] = d.y;
        dydt[2] = d.z;
    };
}

std::vector<LorenzState> lorenz_equilibria(const LorenzParams& p) {
    p.validate();
    std::vector<LorenzState> out{{0.0, 0.0, 0.0}};
    if (p.rho > 1.0) {
        const double r = std::sqrt(p.beta * (p.rho - 1.0));
        out.push_back({r, r, p.rho - 1.0});
        out.push_back({-r, -r, p.rho - 1.0});
    }
    return out;
}

Trajectory simulate_lorenz(const LorenzParams& p, const LorenzState& y0, const TimeGrid& grid) {
    p.validate();
    const auto init = y0.as_array();
    return integrate_ode(lorenz_system(p), init, grid);
}

SeparationSeries divergence_experiment(const LorenzParams& p, const LorenzState& y0,
                                       const LorenzState& perturbation, const TimeGrid& grid) {
    if (!(perturbation.norm() > 0.0)) throw ValidationError("perturbation must be non-zero");
    const Trajectory a = simulate_lorenz(p, y0, grid);
    const Trajectory b = simulate_lorenz(
        p, {y0.x + perturbation.x, y0.y + perturbation.y, y0.z + perturbation.z}, grid);
    SeparationSeries out;
    out.times = a.times;
    out.separation.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.separation.push_back(distance(a.states[i], b.states[i]));
    return out;
}

void LyapunovSettings::validate() const {
    if (!(step > 0.0)) throw ValidationError("lyapunov step must be positive");
    if (!(renormalization_interval >= step)) {
        throw ValidationError("renormalization interval must be at least one step");
    }
    if (!(total_time > transient_time()) || transient_time() < 0.0) {
        throw ValidationError("lyapunov total time must exceed the transient");
    }
    if (!(initial_separation > 0.0)) throw ValidationError("initial separation must be positive");
}

double max_lyapunov(const Rhs& rhs, std::span<const double> y0, const LyapunovSettings& settings) {
    settings.validate();
    const std::size_t dim = y0.size();
    std::vector<double> dir = settings.direction;
    if (dir.empty()) {
        dir.assign(dim, 0.0);
        dir[0] = 1.0;
    }
    if (dir.size() != dim) throw ValidationError("perturbation direction has the wrong dimension");
    const double dn = std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0));
    if (!(dn > 0.0)) throw ValidationError("perturbation direction must be non-zero");

    const double d0 = settings.initial_separation;
    State a(y0.begin(), y0.end());
    State b(dim);
    for (std::size_t i = 0; i < dim; ++i) b[i] = a[i] + d0 * dir[i] / dn;

    const auto steps_per_block = static_cast<std::size_t>(
        std::llround(settings.renormalization_interval / settings.step));
    const double block = static_cast<double>(steps_per_block) * settings.step;
    const auto blocks = static_cast<std::size_t>(std::floor(settings.total_time / block));
    const double transient = settings.transient_time();

    double t = 0.0;
    double log_sum = 0.0;
    double measured = 0.0;
    for (std::size_t k = 0; k < blocks; ++k) {
        for (std::size_t s = 0; s < steps_per_block; ++s) {
            a = rk4_step(rhs, t, a, settings.step);
            b = rk4_step(rhs, t, b, settings.step);
            t += settings.step;
        }
        const double d = distance(a, b);
        if (!std::isfinite(d) || d == 0.0) {
            throw IntegrationError("separation became degenerate during Lyapunov estimation", t, a);
        }
        if (t > transient) {
            log_sum += std::log(d / d0);
            measured += block;
        }
        for (std::size_t i = 0; i < dim; ++i) b[i] = a[i] + (b[i] - a[i]) * (d0 / d);
    }
    if (measured == 0.0) throw ValidationError("no time left after the transient");
    return log_sum / measured;
}

double max_lyapunov(const LorenzParams& p, const LorenzState& y0, const LyapunovSettings& settings) {
    p.validate();
    const auto init = y0.as_array();
    return max_lyapunov(lorenz_system(p), init, settings);
}

} // namespace sustain::climate
