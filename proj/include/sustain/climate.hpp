#pragma once

#include "sustain/numerics.hpp"

#include <array>
#include <optional>
#include <vector>

// Lorenz convection model.
namespace sustain::climate {

struct LorenzParams {
    double sigma = 0.0;
    double rho = 0.0;
    double beta = 0.0;

    void validate() const;
    bool operator==(const LorenzParams&) const = default;
};

// x: convection intensity, y: horizontal velocity, z: temperature difference.
struct LorenzState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    std::array<double, 3> as_array() const { return {x, y, z}; }
    double norm() const;
    bool operator==(const LorenzState&) const = default;
};

LorenzState lorenz_rhs(const LorenzState& s, const LorenzParams& p);

Rhs lorenz_system(const LorenzParams& p);

// Origin, plus the symmetric pair (±sqrt(beta(rho-1)), ±sqrt(beta(rho-1)), rho-1) when rho > 1.
std::vector<LorenzState> lorenz_equilibria(const LorenzParams& p);

Trajectory simulate_lorenz(const LorenzParams& p, const LorenzState& y0, const TimeGrid& grid);

struct SeparationSeries {
    std::vector<double> times;
    std::vector<double> separation;
};

// Euclidean distance between the runs from y0 and y0 + perturbation.
SeparationSeries divergence_experiment(const LorenzParams& p, const LorenzState& y0,
                                       const LorenzState& perturbation, const TimeGrid& grid);

struct LyapunovSettings {
    double step = 0.001;
    double renormalization_interval = 0.1;
    double total_time = 200.0;
    // Defaults to 10% of total_time when unset.
    std::optional<double> transient;
    double initial_separation = 1e-8;
    // Unit direction of the initial offset; the first axis when empty.
    std::vector<double> direction;

    double transient_time() const { return transient.value_or(0.1 * total_time); }
    void validate() const;
};

// Two-trajectory (Benettin) estimate of the largest Lyapunov exponent: the
// companion run is pulled back to the initial separation every
// renormalization interval and the log growth is averaged after the transient.
double max_lyapunov(const Rhs& rhs, std::span<const double> y0, const LyapunovSettings& settings);

double max_lyapunov(const LorenzParams& p, const LorenzState& y0, const LyapunovSettings& settings);

} // namespace sustain::climate
