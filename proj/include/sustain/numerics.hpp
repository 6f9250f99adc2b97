#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace sustain {

using State = std::vector<double>;

// dydt = f(t, y). Implementations write into dydt, which has y.size() entries.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Per-component noise amplitude for additive white noise.
using NoiseAmplitude = Rhs;

struct TimeGrid {
    double t0 = 0.0;
    double t1 = 0.0;
    double step = 0.0;

    // Throws ValidationError unless t1 > t0, step > 0 and the step count is finite.
    void validate() const;

    // Number of steps; the final one is shortened so the grid ends exactly at t1.
    std::size_t steps() const;

    // Node k for k in [0, steps()].
    double node(std::size_t k) const;

    bool operator==(const TimeGrid&) const = default;
};

inline constexpr std::size_t kMaxSteps = 100'000'000;

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    // Number of components reset to zero by a non-negativity clamp.
    std::size_t clamp_events = 0;

    std::size_t size() const noexcept { return times.size(); }
    std::size_t dim() const noexcept { return states.empty() ? 0 : states.front().size(); }
    const State& back() const { return states.back(); }

    // Values of one component over time.
    std::vector<double> component(std::size_t index) const;
};

enum class Boundary { zero_flux, periodic, absorbing };

std::string_view to_string(Boundary b);
// Throws ValidationError for unknown names.
Boundary parse_boundary(std::string_view name);

struct SpatialGrid1D {
    double x0 = 0.0;
    double x1 = 1.0;
    std::size_t cells = 3;
    Boundary boundary = Boundary::zero_flux;

    void validate() const;
    double dx() const { return (x1 - x0) / static_cast<double>(cells); }
    double length() const { return x1 - x0; }
    // Cell centres: x0 + (i + 1/2) dx.
    double center(std::size_t i) const { return x0 + (static_cast<double>(i) + 0.5) * dx(); }

    bool operator==(const SpatialGrid1D&) const = default;
};

enum class Method { rk4, euler };

struct IntegrateOptions {
    Method method = Method::rk4;
    // Reset negative components to zero after each step and count them.
    bool clamp_nonnegative = false;
};

// Classical fourth-order Runge-Kutta step from (t, y) with step h.
State rk4_step(const Rhs& rhs, double t, std::span<const double> y, double h);

Trajectory integrate_ode(const Rhs& rhs, std::span<const double> y0, const TimeGrid& grid,
                         const IntegrateOptions& options = {});

// y_{k+1} = y_k + h f(t_k, y_k) + sqrt(h) a(t_k, y_k) * z_k with z_k ~ N(0, I).
// One normal variate is drawn per component per step, whatever the amplitude.
Trajectory euler_maruyama(const Rhs& drift, const NoiseAmplitude& amplitude,
                          std::span<const double> y0, const TimeGrid& grid, std::uint64_t seed,
                          bool clamp_nonnegative = false);

// Second-order central Laplacian on cell-centred values. Ghost cells:
// zero-flux mirrors the edge cell, absorbing uses zero, periodic wraps.
std::vector<double> laplacian_1d(std::span<const double> values, double dx, Boundary boundary);

// First-order upwind approximation of velocity * dC/dx, with the same ghosts.
std::vector<double> upwind_advection_1d(std::span<const double> values, double velocity, double dx,
                                        Boundary boundary);

// values with one ghost cell on each side, filled per the boundary rule.
std::vector<double> with_ghosts(std::span<const double> values, Boundary boundary);

} // namespace sustain
