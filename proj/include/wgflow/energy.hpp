#pragma once

#include "wgflow/ensemble.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace wgflow {

/// Internal-energy integrand f with its first two derivatives.
struct ScalarField1D {
    enum class Kind { none, identity, log_regularized, quadratic };

    Kind kind = Kind::none;
    double scale = 1.0;  // log_regularized
    double eps = 0.0;    // log_regularized
    double a = 0.0;      // quadratic

    static ScalarField1D none() { return {}; }
    static ScalarField1D identity() { return {Kind::identity}; }
    static ScalarField1D log_regularized(double scale, double eps) { return {Kind::log_regularized, scale, eps, 0.0}; }
    static ScalarField1D quadratic(double a) { return {Kind::quadratic, 1.0, 0.0, a}; }

    bool in_domain(double s) const noexcept;
    double value(double s) const noexcept;
    double d1(double s) const noexcept;
    double d2(double s) const noexcept;
};

/// Radial confinement or interaction potential on R^d.
struct RadialPotential {
    enum class Kind { none, quadratic, quadratic_paper, log_regularized };

    Kind kind = Kind::none;
    double a = 0.0;    // quadratic: V(x) = a/2 |x|^2
    double c = 0.0;    // log_regularized: W(x) = c log(eps^2 + |x|^2)
    double eps = 0.0;

    static RadialPotential none() { return {}; }
    static RadialPotential quadratic(double a) { return {Kind::quadratic, a, 0.0, 0.0}; }
    /// V(x) = |x|^2, gradient 2x.
    static RadialPotential quadratic_paper() { return {Kind::quadratic_paper, 0.0, 0.0, 0.0}; }
    static RadialPotential log_regularized(double c, double eps) { return {Kind::log_regularized, 0.0, c, eps}; }

    double value(std::span<const double> x) const noexcept;
    /// Writes grad V(x) into out (same length as x).
    void grad(std::span<const double> x, std::span<double> out) const noexcept;
};

/// U(rho) = int f(rho * chi_sigma) drho + int V drho + 1/2 int int W(x - y) drho drho,
/// evaluated on equal-weight empirical measures.
///
/// The unbounded built-ins (identity f, quadratic V) fall outside the C^{2,1}_b
/// hypotheses of the convergence theory but are the configurations used in practice.
struct EnergySpec {
    ScalarField1D internal;
    double sigma = 1.0;
    RadialPotential potential;
    RadialPotential interaction;

    /// Throws ParameterError on sigma <= 0 with a non-trivial f, or non-positive eps.
    void validate() const;
};

/// (rho * chi_sigma)(x) with chi_sigma the N(0, sigma^2 Id) density.
double mollified_density(const ParticleEnsemble& e, double sigma, std::span<const double> x);

/// Discrete energy. The interaction double sum includes the diagonal W(0)
/// terms. Throws EvaluationError naming the first particle whose mollified
/// density is outside the domain of f.
double energy_value(const ParticleEnsemble& e, const EnergySpec& spec);

struct GradientParts {
    GradientField internal;
    GradientField potential;
    GradientField interaction;
};

/// Per-particle Wasserstein gradient
///   g_i = (1/N) sum_j (f'(rho_i) + f'(rho_j)) grad chi(X_i - X_j) + grad V(X_i)
///         + (1/N) sum_j grad W(X_i - X_j),   rho_i = (rho * chi_sigma)(X_i).
GradientField wasserstein_gradient(const ParticleEnsemble& e, const EnergySpec& spec);

/// The three contributions of wasserstein_gradient, separately.
GradientParts wasserstein_gradient_parts(const ParticleEnsemble& e, const EnergySpec& spec);

/// sqrt((1/N) sum_i |g_i|^2)
double field_norm(const GradientField& g);
double lifted_gradient_norm(const ParticleEnsemble& e, const EnergySpec& spec);

struct ProbeResult {
    double first = 0.0;   // d/dt U(X + t v) at t = 0, from the gradient
    double second = 0.0;  // central second difference of t -> U(X + t v)
};

/// Default probe step: 1e-4 * (1 + rms particle radius).
double default_probe_step(const ParticleEnsemble& e);

ProbeResult convexity_probe(const ParticleEnsemble& e, const GradientField& v, const EnergySpec& spec, double h);

/// Sampling protocol shared by estimate_lambda / estimate_lipschitz: pairs
/// xi1, xi2 = base + radius * (standard normal per coordinate), drawn from a
/// counter-based generator keyed by seed. Degenerate pairs are redrawn; 100
/// consecutive degenerate draws raise SamplingError.
double estimate_lambda(const EnergySpec& spec, const ParticleEnsemble& base, int samples, double radius,
                       std::uint64_t seed);
double estimate_lipschitz(const EnergySpec& spec, const ParticleEnsemble& base, int samples, double radius,
                          std::uint64_t seed);

std::string to_string(ScalarField1D::Kind kind);
std::string to_string(RadialPotential::Kind kind);

/// Canonical one-line description of a spec (kinds and all parameters at
/// 17 significant digits) and its FNV-1a digest.
std::string canonical_string(const EnergySpec& spec);
std::string spec_digest(const EnergySpec& spec);

}  // namespace wgflow
