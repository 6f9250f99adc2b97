#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sustain {

// Every failure raised by the toolkit derives from Error. The CLI maps
// ValidationError to exit status 1 and everything else to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: violated preconditions and type invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A right-hand side produced a non-finite value.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t, std::vector<double> state)
        : Error(what), t_(t), state_(std::move(state)) {}

    double time() const noexcept { return t_; }
    const std::vector<double>& state() const noexcept { return state_; }

private:
    double t_;
    std::vector<double> state_;
};

class CflViolation : public Error {
public:
    CflViolation(const std::string& what, double max_dt, std::string binding)
        : Error(what), max_dt_(max_dt), binding_(std::move(binding)) {}

    double max_dt() const noexcept { return max_dt_; }
    const std::string& binding() const noexcept { return binding_; }

private:
    double max_dt_;
    std::string binding_;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, double min_emission)
        : Error(what), min_emission_(min_emission) {}

    // Lowest total emission reachable with every source at its maximum reduction.
    double min_achievable_emission() const noexcept { return min_emission_; }

private:
    double min_emission_;
};

} // namespace sustain
