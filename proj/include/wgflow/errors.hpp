#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wgflow {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes, so new failure modes should derive from one of these.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two ensembles differ in particle count or dimension.
class ComparabilityError : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds a configured cap (exact transport solve).
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Energy evaluation left the domain of the internal-energy integrand.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::size_t particle)
        : Error(what), particle_(particle) {}
    std::size_t particle() const noexcept { return particle_; }

private:
    std::size_t particle_;
};

/// The implicit-step inner iteration did not reach its tolerance.
class InnerSolverError : public Error {
public:
    InnerSolverError(const std::string& what, double best_residual, int iterations)
        : Error(what), best_residual_(best_residual), iterations_(iterations) {}
    double best_residual() const noexcept { return best_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double best_residual_;
    int iterations_;
};

/// Formula evaluated outside the region where it is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

/// A diagnostic was asked to judge a record it does not apply to.
class ApplicabilityError : public Error {
public:
    using Error::Error;
};

/// Sweep plan violates the common-final-time grid.
class PlanError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration document or input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wgflow
