#include "sustain/numerics.hpp"

#include "sustain/error.hpp"
#include "sustain/random.hpp"
#include "sustain/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace sustain {
namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

[[noreturn]] void throw_non_finite(std::string_view what, double t, std::span<const double> y) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at t=" << t;
    throw IntegrationError(msg.str(), t, State(y.begin(), y.end()));
}

void eval_checked(const Rhs& f, double t, std::span<const double> y, std::span<double> out,
                  std::string_view what, std::span<const double> report_state) {
    f(t, y, out);
    if (!all_finite(out)) throw_non_finite(what, t, report_state);
}

// Scratch buffers for one RK4 step, reused across a whole integration.
struct Rk4Workspace {
    explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
    State k1, k2, k3, k4, tmp;
};

void rk4_into(const Rhs& rhs, double t, std::span<const double> y, double h, Rk4Workspace& w,
              std::span<double> out) {
    const auto& k = simd::active_kernels();
    const std::size_t n = y.size();
    eval_checked(rhs, t, y, w.k1, "right-hand side", y);
    k.axpy(w.tmp.data(), y.data(), 0.5 * h, w.k1.data(), n);
    eval_checked(rhs, t + 0.5 * h, w.tmp, w.k2, "right-hand side", y);
    k.axpy(w.tmp.data(), y.data(), 0.5 * h, w.k2.data(), n);
    eval_checked(rhs, t + 0.5 * h, w.tmp, w.k3, "right-hand side", y);
    k.axpy(w.tmp.data(), y.data(), h, w.k3.data(), n);
    eval_checked(rhs, t + h, w.tmp, w.k4, "right-hand side", y);
    k.rk4_combine(out.data(), y.data(), h / 6.0, w.k1.data(), w.k2.data(), w.k3.data(),
                  w.k4.data(), n);
}

std::size_t checked_steps(const TimeGrid& grid) {
    grid.validate();
    const std::size_t n = grid.steps();
    if (n > kMaxSteps) {
        throw ValidationError("time grid needs " + std::to_string(n) + " steps; the limit is " +
                              std::to_string(kMaxSteps));
    }
    return n;
}

void check_initial(std::span<const double> y0) {
    if (y0.empty()) throw ValidationError("initial state is empty");
    if (!all_finite(y0)) throw ValidationError("initial state has non-finite entries");
}

} // namespace

void TimeGrid::validate() const {
    if (!std::isfinite(t0) || !std::isfinite(t1) || !std::isfinite(step)) {
        throw ValidationError("time grid values must be finite");
    }
    if (!(t1 > t0)) throw ValidationError("time grid requires t1 > t0");
    if (!(step > 0.0)) throw ValidationError("time grid requires step > 0");
    if (!std::isfinite((t1 - t0) / step)) throw ValidationError("time grid step count overflows");
}

std::size_t TimeGrid::steps() const {
    const double ratio = (t1 - t0) / step;
    // Absorb rounding in ratios that are integral in exact arithmetic.
    const double n = std::ceil(ratio - 1e-9 * std::max(1.0, ratio));
    return static_cast<std::size_t>(std::max(1.0, n));
}

double TimeGrid::node(std::size_t k) const {
    return k >= steps() ? t1 : t0 + static_cast<double>(k) * step;
}

std::vector<double> Trajectory::component(std::size_t index) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.at(index));
    return out;
}

std::string_view to_string(Boundary b) {
    switch (b) {
    case Boundary::zero_flux: return "zero-flux";
    case Boundary::periodic: return "periodic";
    case Boundary::absorbing: return "absorbing";
    }
    return "unknown";
}

Boundary parse_boundary(std::string_view name) {
    if (name == "zero-flux") return Boundary::zero_flux;
    if (name == "periodic") return Boundary::periodic;
    if (name == "absorbing") return Boundary::absorbing;
    throw ValidationError("unknown boundary '" + std::string(name) +
                          "' (expected zero-flux, periodic or absorbing)");
}

void SpatialGrid1D::validate() const {
    if (!std::isfinite(x0) || !std::isfinite(x1)) throw ValidationError("spatial grid bounds must be finite");
    if (!(x1 > x0)) throw ValidationError("spatial grid requires x1 > x0");
    if (cells < 3) throw ValidationError("spatial grid requires at least 3 cells");
}

State rk4_step(const Rhs& rhs, double t, std::span<const double> y, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("rk4 step requires h > 0");
    Rk4Workspace w(y.size());
    State out(y.size());
    rk4_into(rhs, t, y, h, w, out);
    return out;
}

Trajectory integrate_ode(const Rhs& rhs, std::span<const double> y0, const TimeGrid& grid,
                         const IntegrateOptions& options) {
    check_initial(y0);
    const std::size_t n = checked_steps(grid);
    const std::size_t dim = y0.size();
    const auto& k = simd::active_kernels();

    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.times.push_back(grid.t0);
    traj.states.emplace_back(y0.begin(), y0.end());

    Rk4Workspace w(dim);
    State next(dim);
    for (std::size_t s = 0; s < n; ++s) {
        const double t = grid.node(s);
        const double h = grid.node(s + 1) - t;
        const State& y = traj.states.back();
        if (options.method == Method::rk4) {
            rk4_into(rhs, t, y, h, w, next);
        } else {
            eval_checked(rhs, t, y, w.k1, "right-hand side", y);
            k.axpy(next.data(), y.data(), h, w.k1.data(), dim);
        }
        if (options.clamp_nonnegative) traj.clamp_events += k.clamp_nonnegative(next.data(), dim);
        traj.times.push_back(grid.node(s + 1));
        traj.states.push_back(next);
    }
    return traj;
}

Trajectory euler_maruyama(const Rhs& drift, const NoiseAmplitude& amplitude,
                          std::span<const double> y0, const TimeGrid& grid, std::uint64_t seed,
                          bool clamp_nonnegative) {
    check_initial(y0);
    const std::size_t n = checked_steps(grid);
    const std::size_t dim = y0.size();
    const auto& k = simd::active_kernels();
    Rng rng(seed);

    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.times.push_back(grid.t0);
    traj.states.emplace_back(y0.begin(), y0.end());

    State f(dim), a(dim), kick(dim), tmp(dim), next(dim);
    for (std::size_t s = 0; s < n; ++s) {
        const double t = grid.node(s);
        const double h = grid.node(s + 1) - t;
        const State& y = traj.states.back();
        eval_checked(drift, t, y, f, "drift", y);
        eval_checked(amplitude, t, y, a, "noise amplitude", y);
        for (std::size_t i = 0; i < dim; ++i) kick[i] = a[i] * rng.normal();
        k.axpy(tmp.data(), y.data(), h, f.data(), dim);
        k.axpy(next.data(), tmp.data(), std::sqrt(h), kick.data(), dim);
        if (clamp_nonnegative) traj.clamp_events += k.clamp_nonnegative(next.data(), dim);
        traj.times.push_back(grid.node(s + 1));
        traj.states.push_back(next);
    }
    return traj;
}

std::vector<double> with_ghosts(std::span<const double> values, Boundary boundary) {
    const std::size_t n = values.size();
    if (n < 3) throw ValidationError("stencils need at least 3 cells");
    std::vector<double> g(n + 2);
    std::copy(values.begin(), values.end(), g.begin() + 1);
    switch (boundary) {
    case Boundary::zero_flux:
        g[0] = values[0];
        g[n + 1] = values[n - 1];
        break;
    case Boundary::periodic:
        g[0] = values[n - 1];
        g[n + 1] = values[0];
        break;
    case Boundary::absorbing:
        g[0] = 0.0;
        g[n + 1] = 0.0;
        break;
    }
    return g;
}

std::vector<double> laplacian_1d(std::span<const double> values, double dx, Boundary boundary) {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("laplacian requires dx > 0");
    const auto g = with_ghosts(values, boundary);
    std::vector<double> out(values.size());
    simd::active_kernels().laplacian(out.data(), g.data(), 1.0 / (dx * dx), values.size());
    return out;
}

std::vector<double> upwind_advection_1d(std::span<const double> values, double velocity, double dx,
                                        Boundary boundary) {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("advection requires dx > 0");
    const auto g = with_ghosts(values, boundary);
    std::vector<double> out(values.size());
    simd::active_kernels().upwind(out.data(), g.data(), velocity / dx, values.size());
    return out;
}

} // namespace sustain
