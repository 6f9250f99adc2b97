#pragma once

#include "sustain/numerics.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Tipping-point diagnostics.
namespace sustain::indicators {

// Statistic over each trailing window; entry j covers samples
// [j, j + window) and is stamped with the time of its last sample.
struct WindowSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::size_t window = 0;
};

// Unbiased sample variance per trailing window (window >= 2).
WindowSeries rolling_variance(std::span<const double> times, std::span<const double> series,
                              std::size_t window);

// Pearson correlation between each window and itself shifted by one
// sample (window >= 3). Windows with zero variance yield NaN.
WindowSeries lag1_autocorrelation(std::span<const double> times, std::span<const double> series,
                                  std::size_t window);

// Vector field depending on one scalar parameter.
struct ParameterFamily {
    std::size_t dim = 0;
    std::function<void(double parameter, std::span<const double> y, std::span<double> dydt)> rhs;
    // Newton starting points; the origin is always tried as well.
    std::vector<State> seeds;
};

struct SweepSettings {
    std::size_t newton_iterations = 100;
    double residual_tolerance = 1e-10;
    double merge_tolerance = 1e-6;
    // Leading eigenvalue real parts within this of zero count as non-positive.
    double marginal_tolerance = 1e-6;
    // Attractor bound: max norm over the second half of an RK4 run from the
    // first seed. Skipped when horizon <= 0.
    double attractor_horizon = 20.0;
    double attractor_step = 0.01;
    bool parallel = false;
};

struct SampleSummary {
    double parameter = 0.0;
    std::vector<State> equilibria;
    std::size_t equilibria_count = 0;
    // +1 if some equilibrium has a leading eigenvalue with positive real part, else -1.
    int leading_sign = -1;
    double leading_real_part = 0.0;
    double attractor_bound = 0.0;
    // Seeds whose Newton iteration did not reach the residual tolerance.
    std::size_t newton_failures = 0;
    std::string note;
};

struct Transition {
    double lower = 0.0;
    double upper = 0.0;
    std::string reason;  // "equilibria", "stability" or both joined by '+'
};

struct SweepResult {
    std::vector<SampleSummary> samples;  // increasing parameter
    std::vector<Transition> transitions;
};

// Samples `samples` evenly spaced values between the two bounds (either
// order) and flags every adjacent pair whose equilibria count or leading
// stability sign differs.
SweepResult bifurcation_sweep(const ParameterFamily& family, double from, double to, std::size_t samples,
                              const SweepSettings& settings = {});

// Equilibria reachable by damped Newton from the seeds and the origin.
std::vector<State> find_equilibria(const ParameterFamily& family, double parameter,
                                   const SweepSettings& settings, std::size_t* failures = nullptr);

// Largest real part among the eigenvalues of the central-difference Jacobian.
double leading_eigenvalue(const ParameterFamily& family, double parameter, std::span<const double> at);

} // namespace sustain::indicators
