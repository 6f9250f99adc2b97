#include "sustain/indicators.hpp"

#include "sustain/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace sustain::indicators {
namespace {

void check_series(std::span<const double> times, std::span<const double> series, std::size_t window) {
    if (times.size() != series.size()) throw ValidationError("times and values differ in length");
    if (window > series.size()) {
        throw ValidationError("window of " + std::to_string(window) + " exceeds series length " +
                              std::to_string(series.size()));
    }
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Vec evaluate(const ParameterFamily& f, double p, const Vec& y) {
    Vec out(static_cast<Eigen::Index>(f.dim));
    f.rhs(p, std::span<const double>(y.data(), f.dim), std::span<double>(out.data(), f.dim));
    return out;
}

Mat jacobian(const ParameterFamily& f, double p, const Vec& y) {
    const auto n = static_cast<Eigen::Index>(f.dim);
    Mat J(n, n);
    Vec plus = y, minus = y;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(y[j]));
        plus[j] = y[j] + h;
        minus[j] = y[j] - h;
        J.col(j) = (evaluate(f, p, plus) - evaluate(f, p, minus)) / (2.0 * h);
        plus[j] = y[j];
        minus[j] = y[j];
    }
    return J;
}

// Accepts a point once the residual is below tolerance and either the Newton
// step has become negligible or the residual can no longer be reduced.
// Requiring the small step keeps slowly converging degenerate roots from
// being reported as separate equilibria.
std::optional<Vec> damped_newton(const ParameterFamily& f, double p, Vec x, const SweepSettings& s) {
    Vec fx = evaluate(f, p, x);
    double res = fx.norm();
    for (std::size_t it = 0; it < s.newton_iterations; ++it) {
        if (!std::isfinite(res)) return std::nullopt;
        if (res == 0.0) return x;
        const Mat J = jacobian(f, p, x);
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible()) break;
        const Vec dx = lu.solve(-fx);
        if (res < s.residual_tolerance && dx.norm() <= 1e-3 * s.merge_tolerance * (1.0 + x.norm())) return x;
        double damping = 1.0;
        bool improved = false;
        for (int k = 0; k < 40; ++k) {
            const Vec trial = x + damping * dx;
            const Vec ft = evaluate(f, p, trial);
            const double r = ft.norm();
            if (std::isfinite(r) && r < res) {
                x = trial;
                fx = ft;
                res = r;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if (!improved) break;
    }
    if (res < s.residual_tolerance) return x;
    return std::nullopt;
}

SampleSummary summarize(const ParameterFamily& family, double p, const SweepSettings& settings) {
    SampleSummary out;
    out.parameter = p;
    out.equilibria = find_equilibria(family, p, settings, &out.newton_failures);
    out.equilibria_count = out.equilibria.size();
    out.leading_real_part = -std::numeric_limits<double>::infinity();
    for (const auto& e : out.equilibria) {
        out.leading_real_part = std::max(out.leading_real_part, leading_eigenvalue(family, p, e));
    }
    out.leading_sign = out.leading_real_part > settings.marginal_tolerance ? 1 : -1;
    if (out.equilibria.empty()) out.note = "no equilibrium found";

    if (settings.attractor_horizon > 0.0) {
        const Rhs rhs = [&family, p](double, std::span<const double> y, std::span<double> dydt) {
            family.rhs(p, y, dydt);
        };
        State start = family.seeds.empty() ? State(family.dim, 0.0) : family.seeds.front();
        try {
            const Trajectory traj =
                integrate_ode(rhs, start, {0.0, settings.attractor_horizon, settings.attractor_step});
            double bound = 0.0;
            for (std::size_t k = traj.size() / 2; k < traj.size(); ++k) {
                double sq = 0.0;
                for (double v : traj.states[k]) sq += v * v;
                bound = std::max(bound, std::sqrt(sq));
            }
            out.attractor_bound = bound;
        } catch (const IntegrationError&) {
            out.attractor_bound = std::numeric_limits<double>::infinity();
            out.note += out.note.empty() ? "attractor run diverged" : "; attractor run diverged";
        }
    }
    return out;
}

} // namespace

WindowSeries rolling_variance(std::span<const double> times, std::span<const double> series,
                              std::size_t window) {
    if (window < 2) throw ValidationError("rolling variance needs a window of at least 2");
    check_series(times, series, window);
    WindowSeries out;
    out.window = window;
    for (std::size_t end = window; end <= series.size(); ++end) {
        const auto w = series.subspan(end - window, window);
        const double m = mean_of(w);
        double ss = 0.0;
        for (double x : w) ss += (x - m) * (x - m);
        out.times.push_back(times[end - 1]);
        out.values.push_back(ss / static_cast<double>(window - 1));
    }
    return out;
}

WindowSeries lag1_autocorrelation(std::span<const double> times, std::span<const double> series,
                                  std::size_t window) {
    if (window < 3) throw ValidationError("lag-1 autocorrelation needs a window of at least 3");
    check_series(times, series, window);
    WindowSeries out;
    out.window = window;
    for (std::size_t end = window; end <= series.size(); ++end) {
        const auto lead = series.subspan(end - window, window - 1);
        const auto lag = series.subspan(end - window + 1, window - 1);
        const double ma = mean_of(lead), mb = mean_of(lag);
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < lead.size(); ++i) {
            const double a = lead[i] - ma, b = lag[i] - mb;
            sab += a * b;
            saa += a * a;
            sbb += b * b;
        }
        double r = std::numeric_limits<double>::quiet_NaN();
        if (saa > 0.0 && sbb > 0.0) r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
        out.times.push_back(times[end - 1]);
        out.values.push_back(r);
    }
    return out;
}

std::vector<State> find_equilibria(const ParameterFamily& family, double parameter,
                                   const SweepSettings& settings, std::size_t* failures) {
    if (family.dim == 0 || !family.rhs) throw ValidationError("parameter family is empty");
    std::vector<State> starts{State(family.dim, 0.0)};
    for (const auto& s : family.seeds) {
        if (s.size() != family.dim) throw ValidationError("Newton seed has the wrong dimension");
        starts.push_back(s);
    }
    std::vector<State> roots;
    std::size_t failed = 0;
    for (const auto& s : starts) {
        const auto root = damped_newton(family, parameter, Eigen::Map<const Vec>(s.data(), s.size()), settings);
        if (!root) {
            ++failed;
            continue;
        }
        const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const State& r) {
            return (Eigen::Map<const Vec>(r.data(), r.size()) - *root).norm() < settings.merge_tolerance;
        });
        if (!duplicate) roots.emplace_back(root->data(), root->data() + root->size());
    }
    if (failures) *failures = failed;
    std::sort(roots.begin(), roots.end());
    return roots;
}

double leading_eigenvalue(const ParameterFamily& family, double parameter, std::span<const double> at) {
    const Vec y = Eigen::Map<const Vec>(at.data(), static_cast<Eigen::Index>(at.size()));
    const Mat J = jacobian(family, parameter, y);
    Eigen::EigenSolver<Mat> solver(J, false);
    return solver.eigenvalues().real().maxCoeff();
}

SweepResult bifurcation_sweep(const ParameterFamily& family, double from, double to, std::size_t samples,
                              const SweepSettings& settings) {
    if (samples < 2) throw ValidationError("a sweep needs at least 2 samples");
    if (!std::isfinite(from) || !std::isfinite(to) || from == to) {
        throw ValidationError("sweep bounds must be finite and distinct");
    }
    const double lo = std::min(from, to), hi = std::max(from, to);
    std::vector<double> params(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        params[k] = k + 1 == samples ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
    }

    SweepResult result;
    result.samples.resize(samples);
    if (settings.parallel) {
        std::vector<std::future<SampleSummary>> jobs;
        jobs.reserve(samples);
        for (double p : params) {
            jobs.push_back(std::async(std::launch::async, [&family, &settings, p] { return summarize(family, p, settings); }));
        }
        for (std::size_t k = 0; k < samples; ++k) result.samples[k] = jobs[k].get();
    } else {
        for (std::size_t k = 0; k < samples; ++k) result.samples[k] = summarize(family, params[k], settings);
    }

    for (std::size_t k = 0; k + 1 < samples; ++k) {
        const auto& a = result.samples[k];
        const auto& b = result.samples[k + 1];
        std::string reason;
        if (a.equilibria_count != b.equilibria_count) reason = "equilibria";
        if (a.leading_sign != b.leading_sign) reason += reason.empty() ? "stability" : "+stability";
        if (!reason.empty()) result.transitions.push_back({a.parameter, b.parameter, reason});
    }
    return result;
}

} // namespace sustain::indicators
