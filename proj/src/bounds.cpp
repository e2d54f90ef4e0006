#include "wgflow/bounds.hpp"

#include "wgflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace wgflow::bounds {
namespace {

void require_small_step(double lambda, double tau) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (!(std::abs(lambda) * tau < 1.0)) throw DomainError("|lambda| * tau must be < 1");
}

void require_refined_regime(double lambda, double tau, double lipschitz) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    if (!(lambda >= 0.0)) throw DomainError("refined estimates require lambda >= 0");
    if (!(lipschitz >= 0.0)) throw DomainError("L must be nonnegative");
    if (lipschitz * tau > 1.0) throw DomainError("refined estimates require tau <= 1/L");
}

void require_nonnegative_data(const BoundInputs& in) {
    if (!(in.horizon >= 0.0) || !(in.init_error >= 0.0) || !(in.init_grad_norm >= 0.0) || !(in.curvature >= 0.0)) {
        throw DomainError("horizon, initial error, gradient norm and curvature must be nonnegative");
    }
}

// lambda / lambda_tau_L with the removable singularity at lambda = 0 filled in.
double convexity_ratio(double lambda, double tau, double lipschitz) {
    if (lambda < 1e-12) return 2.0 / (2.0 - lipschitz * tau);
    return lambda / lambda_tau_L(lambda, tau, lipschitz);
}

}  // namespace

double lambda_tau(double lambda, double tau) {
    require_small_step(lambda, tau);
    // log1p form keeps full relative accuracy for small lambda * tau.
    return (std::log1p(lambda * tau) - std::log1p(-lambda * tau)) / (2.0 * tau);
}

double lambda_tau_L(double lambda, double tau, double lipschitz) {
    require_refined_regime(lambda, tau, lipschitz);
    return std::log1p(lambda * tau * (2.0 - lipschitz * tau)) / (2.0 * tau);
}

double gradient_decay_factor(double lambda, double tau) {
    require_small_step(lambda, tau);
    if (lambda >= 0.0) return 1.0;
    return (1.0 - lambda * tau) / (1.0 + lambda * tau);
}

double stability_factor(double lambda, double tau, double horizon) {
    require_small_step(lambda, tau);
    if (!(horizon >= 0.0)) throw DomainError("horizon must be nonnegative");
    return std::max(1.0, std::exp(-2.0 * lambda_tau(lambda, tau) * horizon));
}

double evi_lower_order_constant(double lt, double t, double tau) {
    const double span = std::abs(lt) * (t + tau);
    return (1.0 + span) * std::exp(-lt * tau) + std::sqrt(0.75 + (1.0 + 7.0 / 3.0 * span) * std::exp(-2.0 * lt * tau));
}

double evi_error_bound(const BoundInputs& in) {
    require_small_step(in.lambda, in.tau);
    require_nonnegative_data(in);
    const double sqrt3 = std::sqrt(3.0);
    if (in.lambda >= 0.0) {
        return sqrt3 * in.init_error + std::sqrt(33.0) / 2.0 * in.tau * in.init_grad_norm;
    }
    const double lt = lambda_tau(in.lambda, in.tau);
    const double growth = std::exp(-lt * in.horizon);
    return sqrt3 * growth * in.init_error +
           sqrt3 * evi_lower_order_constant(lt, in.horizon, in.tau) * in.tau * growth * in.init_grad_norm;
}

double k_constant(double lt, double horizon, double tau_prime) {
    if (lt > 0.0) throw DomainError("k_constant is defined for lambda_tau <= 0");
    if (!(horizon >= 0.0) || !(tau_prime >= 0.0)) throw DomainError("horizon and tau' must be nonnegative");
    const double span = horizon + tau_prime;
    return std::sqrt(0.75 + (1.0 - 7.0 / 3.0 * lt * span) * std::exp(-2.0 * lt * tau_prime)) +
           std::abs(lt) * span * std::exp(-lt * tau_prime);
}

double refined_constant(double lambda, double lipschitz, double t, double tau) {
    require_refined_regime(lambda, tau, lipschitz);
    const double ltl = lambda_tau_L(lambda, tau, lipschitz);
    const double ratio = convexity_ratio(lambda, tau, lipschitz);
    const double span = t + tau;
    return std::exp(ltl * tau) + std::sqrt(ratio) * span +
           std::sqrt(ratio * (1.0 + 2.0 * lambda * span) + lambda * span + std::exp(2.0 * ltl * tau));
}

double refined_error_bound(const BoundInputs& in) {
    require_refined_regime(in.lambda, in.tau, in.lipschitz);
    require_nonnegative_data(in);
    const double ltl = lambda_tau_L(in.lambda, in.tau, in.lipschitz);
    const double c = refined_constant(in.lambda, in.lipschitz, in.horizon, in.tau);
    return std::sqrt(3.0) * std::exp(-ltl * in.horizon) * (in.init_error + c * in.tau * in.init_grad_norm);
}

double smooth_error_bound(const BoundInputs& in) {
    if (!(in.lipschitz > 0.0)) throw DomainError("smooth_error_bound requires L > 0");
    if (!(in.tau > 0.0) || in.lipschitz * in.tau > 1.0) throw DomainError("smooth_error_bound requires 0 < tau <= 1/L");
    if (!(in.alpha > 0.0 && in.alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    require_nonnegative_data(in);
    const double growth = std::exp(2.0 * in.lipschitz * in.horizon);
    return growth * in.init_error +
           2.0 * (in.curvature / in.lipschitz) * (growth - 1.0) * std::pow(in.tau, 1.0 + in.alpha);
}

}  // namespace wgflow::bounds
