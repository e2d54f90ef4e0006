#pragma once

namespace wgflow::bounds {

/// Inputs shared by the error-bound calculators.
struct BoundInputs {
    double lambda = 0.0;          // convexity modulus of the lifted energy
    double lipschitz = 0.0;       // Lipschitz constant L of the lifted gradient
    double tau = 0.1;
    double horizon = 0.0;         // t (or T)
    double init_error = 0.0;      // |X_0 - Id| in L2(rho0)
    double init_grad_norm = 0.0;  // |grad phi#(X_0)| in L2(rho0)
    double curvature = 0.0;       // Holder modulus of the flow acceleration, L_alpha(T, X'')
    double alpha = 1.0;
};

/// (1/(2 tau)) log((1 + lambda tau) / (1 - lambda tau)); requires |lambda| tau < 1.
double lambda_tau(double lambda, double tau);

/// log(1 + lambda tau (2 - L tau)) / (2 tau); requires lambda >= 0 and tau <= 1/L.
double lambda_tau_L(double lambda, double tau, double lipschitz);

/// Per-step growth factor C(lambda, tau) of the squared gradient norm:
/// 1 for lambda >= 0, exp(2 |lambda_tau| tau) = (1 - lambda tau)/(1 + lambda tau) otherwise.
double gradient_decay_factor(double lambda, double tau);

/// max{1, exp(-2 lambda_tau T)}
double stability_factor(double lambda, double tau, double horizon);

/// Lower-order constant C(lambda_tau, t, tau) of the O(tau) estimate (lambda < 0 branch).
double evi_lower_order_constant(double lambda_tau_value, double t, double tau);

/// O(tau) estimate for lambda-convex energies, both sign branches.
double evi_error_bound(const BoundInputs& in);

/// K(lambda_tau, T, tau'); the same lambda_tau is used in both places it
/// appears. Requires lambda_tau <= 0.
double k_constant(double lambda_tau_value, double horizon, double tau_prime);

/// C~(lambda, t, tau) of the refined estimate; lambda / lambda_tau_L is
/// replaced by its limit 2 / (2 - L tau) when lambda < 1e-12.
double refined_constant(double lambda, double lipschitz, double t, double tau);

/// sqrt(3) exp(-lambda_tau_L t) (init_error + C~ tau init_grad_norm); lambda >= 0, tau <= 1/L.
double refined_error_bound(const BoundInputs& in);

/// exp(2 L T) init_error + 2 (curvature / L) (exp(2 L T) - 1) tau^(1 + alpha); L > 0, tau <= 1/L.
double smooth_error_bound(const BoundInputs& in);

}  // namespace wgflow::bounds
