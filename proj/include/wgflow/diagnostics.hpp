#pragma once

#include "wgflow/energy.hpp"
#include "wgflow/steppers.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace wgflow::diagnostics {

inline constexpr double kDefaultRelativeTol = 1e-8;
inline constexpr double kDefaultAbsoluteTol = 1e-10;

/// One inequality instance lhs <= rhs; slack = rhs - lhs. `allowance` is the
/// admissible negative slack for this row.
struct CheckRow {
    std::string check;
    std::size_t step = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double allowance = 0.0;

    bool ok() const noexcept { return slack >= -allowance; }
};

struct CheckReport {
    std::string name;
    std::vector<CheckRow> rows;
    double tolerance = 0.0;
    double min_slack = 0.0;
    bool pass = true;
    /// Set when a sub-check failed whose failure does not imply a violation.
    bool inconclusive = false;
    std::string note;

    /// First failing row, or nullptr.
    const CheckRow* first_failure() const noexcept;
};

/// Rejects a record produced under a different energy spec.
void require_matching_spec(const TrajectoryRecord& rec, const EnergySpec& spec);

/// phi(n+1) - phi(n) <= (tau/4)(gamma(n)^2 - gamma(n+1)^2); allowance tol (1 + |phi(n)|).
CheckReport check_energy_almost_decreasing(const TrajectoryRecord& rec, double tol = kDefaultRelativeTol);

/// gamma(n+1)^2 <= C(lambda, tau) gamma(n)^2; allowance tol gamma(n)^2.
CheckReport check_gradient_decay(const TrajectoryRecord& rec, double lambda, double tol = kDefaultAbsoluteTol);

/// Energy dissipation with margin, exponential gradient decay at rate
/// lambda_tau_L, and the displacement lower bound delta(n)^2 >=
/// tau^2 (1 - L tau / 2) gamma(n+1)^2. Requires lambda >= 0, tau <= 1/L.
CheckReport check_refined_decay(const TrajectoryRecord& rec, double lambda, double lipschitz,
                                double tol = kDefaultAbsoluteTol);

/// sum_j delta(j)^2 / tau <= T C~(lambda, tau, T) gamma(0)^2, and the
/// Lipschitz-in-time bound checked through the surrogate sum_{j=m}^{n-1} delta(j)
/// (an upper bound of |X_n - X_m|): a surrogate failure is reported as
/// inconclusive and does not fail the check.
CheckReport check_classical_stability(const TrajectoryRecord& rec, double lambda, double horizon,
                                      double tol = kDefaultAbsoluteTol);

/// delta(j) <= tau exp(-j lambda_tau_L tau) gamma(0) per step, and
/// sum_j exp(2 j lambda_tau_L tau) delta(j)^2 / tau <= T gamma(0)^2.
CheckReport check_refined_stability(const TrajectoryRecord& rec, double lambda, double lipschitz, double horizon,
                                    double tol = kDefaultAbsoluteTol);

/// CSV `check,step,lhs,rhs,slack` plus a trailing `# verdict: pass|fail` line.
void write_report_csv(std::ostream& out, const CheckReport& report);

}  // namespace wgflow::diagnostics
