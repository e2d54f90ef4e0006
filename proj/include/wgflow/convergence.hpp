#pragma once

#include "wgflow/bounds.hpp"
#include "wgflow/energy.hpp"
#include "wgflow/ensemble.hpp"
#include "wgflow/rational.hpp"
#include "wgflow/steppers.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wgflow {

/// Exact flows used as references.
struct AnalyticOracle {
    enum class Kind { quadratic_confinement, quadratic_interaction };

    Kind kind = Kind::quadratic_confinement;
    /// quadratic_confinement: V(x) = a/2 |x|^2, X(t) = exp(-a t) X0.
    double a = 1.0;

    /// quadratic_interaction: W(x) = 1/2 |x|^2, centroid fixed and deviations scaled by exp(-t).
    static AnalyticOracle quadratic_confinement(double a) { return {Kind::quadratic_confinement, a}; }
    static AnalyticOracle quadratic_interaction() { return {Kind::quadratic_interaction, 1.0}; }

    /// The energy whose flow this oracle solves.
    EnergySpec energy() const;
};

std::string to_string(AnalyticOracle::Kind kind);
AnalyticOracle::Kind parse_oracle_kind(const std::string& s);

ParticleEnsemble analytic_oracle(const AnalyticOracle& oracle, const ParticleEnsemble& x0, double t);

/// l2_reference_distance of two terminal ensembles.
double terminal_error(const ParticleEnsemble& run, const ParticleEnsemble& ref);
/// As above; throws PlanError unless the two final times agree exactly.
double terminal_error(const ParticleEnsemble& run, const Rational& run_time, const ParticleEnsemble& ref,
                      const Rational& ref_time);

struct OrderFit {
    double p = 0.0;
    /// Root-mean-square residual of the log-log least-squares fit.
    double residual = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log(error) against log(tau). Points with a zero
/// or non-finite error are skipped; throws FitError with fewer than 2 left.
OrderFit fit_order(const std::vector<std::pair<double, double>>& points);

struct SweepPlan {
    EnergySpec spec;
    ParticleEnsemble x0;
    SchemeKind scheme = SchemeKind::trapezoid;
    InnerSolverConfig inner;
    std::optional<double> declared_lambda;
    std::optional<double> declared_lipschitz;

    std::vector<Rational> taus;
    Rational t_final{1};
    /// Exactly one of the two references must be set.
    std::optional<Rational> tau_ref;
    std::optional<AnalyticOracle> oracle;

    /// When set, each row carries smooth_error_bound at that tau and horizon
    /// t_final (the tau and horizon fields are overwritten).
    std::optional<bounds::BoundInputs> overlay;

    /// Throws PlanError on grid violations or a missing/ambiguous reference.
    void validate() const;
};

struct SweepRow {
    Rational tau;
    std::size_t steps = 0;
    double terminal_error = 0.0;
    bool failed = false;
    std::string failure;
    /// Fitted order over this row and all coarser rows; empty with fewer than 2 usable points.
    std::optional<double> fitted_p_cumulative;
    std::optional<double> bound_overlay;
    double wall_seconds = 0.0;
};

struct ConvergenceReport {
    std::vector<SweepRow> rows;  // tau descending
    std::optional<OrderFit> fit;
    /// "analytic:<kind>" or "tau_ref=<p/q>".
    std::string reference;
    double reference_wall_seconds = 0.0;
};

/// Runs every member from the same initial ensemble, members in parallel up
/// to configured_threads(). The reference run (if any) executes once.
ConvergenceReport run_sweep(const SweepPlan& plan);

/// Header `tau,steps,terminal_error,fitted_p_cumulative,bound_overlay`, rows
/// tau-descending, final line `# fitted_order=<p> residual=<r>`. Wall times
/// are not written so the file is reproducible.
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);

}  // namespace wgflow
