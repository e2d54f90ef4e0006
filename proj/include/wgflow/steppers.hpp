#pragma once

#include "wgflow/energy.hpp"
#include "wgflow/ensemble.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wgflow {

enum class SchemeKind { explicit_euler, implicit_euler, trapezoid };
enum class InnerKind { fixed_point, prox_descent };

std::string to_string(SchemeKind kind);
std::string to_string(InnerKind kind);
SchemeKind parse_scheme_kind(const std::string& s);
InnerKind parse_inner_kind(const std::string& s);

struct InnerSolverConfig {
    InnerKind kind = InnerKind::fixed_point;
    /// Stop once the L2(rho0) norm of successive iterates is <= tol.
    double tol = 1e-10;
    int max_iters = 10000;
    /// prox_descent step size; empty means `auto` = 1/(1/tau + L/2) for the
    /// trapezoid step (1/(1/tau + L) for implicit Euler), L from estimate_lipschitz.
    std::optional<double> descent_rate;
};

struct SchemeConfig {
    SchemeKind scheme = SchemeKind::trapezoid;
    double tau = 0.1;
    double t_final = 1.0;
    InnerSolverConfig inner;
    /// User-declared convexity modulus; when present and negative the
    /// trapezoid step requires lambda/2 + 1/tau > 0.
    std::optional<double> declared_lambda;
    std::optional<double> declared_lipschitz;

    /// Throws ParameterError on an inadmissible configuration.
    void validate() const;

    /// ceil(t_final / tau), treating quotients within 1e-9 of an integer as exact.
    std::size_t step_count() const;
};

struct StepResult {
    ParticleEnsemble next;
    int inner_iterations = 0;
    /// L2(rho0) norm of the implicit-equation defect at `next`.
    double residual = 0.0;
    GradientField gradient_at_next;
};

/// next_i = x_i - tau * g_i(x)
ParticleEnsemble explicit_euler_step(const ParticleEnsemble& x, const EnergySpec& spec, double tau);

/// Solves next = x - tau * g(next).
StepResult implicit_euler_step(const ParticleEnsemble& x, const EnergySpec& spec, const SchemeConfig& cfg);

/// Solves next = x - (tau/2) (g(next) + g(x)).
StepResult trapezoid_step(const ParticleEnsemble& x, const EnergySpec& spec, const SchemeConfig& cfg);

/// Reusable one-step map. Resolves the `auto` descent rate once (at the
/// first ensemble it sees) and reuses the gradient at the current iterate.
class Stepper {
public:
    Stepper(EnergySpec spec, SchemeConfig cfg);

    /// Advances x given gx = g(x).
    StepResult step(const ParticleEnsemble& x, const GradientField& gx);

    const SchemeConfig& config() const noexcept { return cfg_; }
    const EnergySpec& spec() const noexcept { return spec_; }
    /// Descent rate used by prox_descent (empty until resolved or when unused).
    std::optional<double> descent_rate() const noexcept { return rate_; }

private:
    StepResult explicit_step(const ParticleEnsemble& x, const GradientField& gx) const;
    StepResult implicit_step(const ParticleEnsemble& x, const GradientField& gx);
    double resolve_rate(const ParticleEnsemble& x);

    EnergySpec spec_;
    SchemeConfig cfg_;
    std::optional<double> rate_;
};

struct TrajectoryRow {
    std::size_t step = 0;
    double t = 0.0;
    double energy = 0.0;
    double grad_norm = 0.0;
    /// |X_step - X_{step-1}| in L2(rho0); zero for the initial row.
    double step_displacement = 0.0;
    double residual = 0.0;
    int inner_iterations = 0;
};

/// Per-step log of a run. `initial` holds step 0; rows hold steps 1..N.
/// Derived quantities used by the diagnostics:
///   gamma(n) = grad_norm at step n, phi(n) = energy at step n,
///   delta(n) = |X_{n+1} - X_n| (n = 0..N-1).
struct TrajectoryRecord {
    SchemeKind scheme = SchemeKind::trapezoid;
    double tau = 0.0;
    std::string spec_digest;
    std::optional<double> lambda;
    std::optional<double> lipschitz;
    bool complete = true;
    std::string failure;

    TrajectoryRow initial;
    std::vector<TrajectoryRow> rows;

    std::size_t steps() const noexcept { return rows.size(); }
    double gamma(std::size_t n) const { return n == 0 ? initial.grad_norm : rows.at(n - 1).grad_norm; }
    double phi(std::size_t n) const { return n == 0 ? initial.energy : rows.at(n - 1).energy; }
    double delta(std::size_t n) const { return rows.at(n).step_displacement; }
};

/// Time-series CSV: header `step,t,energy,grad_norm,step_displacement,residual,inner_iterations`,
/// the initial state as step 0, then one row per step; metadata trails as `# key=value` lines.
void write_record_csv(std::ostream& out, const TrajectoryRecord& rec);
TrajectoryRecord read_record_csv(std::istream& in);
TrajectoryRecord read_record_csv(const std::string& path);

struct TrajectoryResult {
    TrajectoryRecord record;
    /// (step, ensemble) at step 0, every multiple of save_every, and the last step.
    std::vector<std::pair<std::size_t, ParticleEnsemble>> snapshots;
    ParticleEnsemble final_state;
    std::optional<double> descent_rate;
};

/// Iterates the configured scheme from x0 for cfg.step_count() steps. An
/// inner-solver failure stops the run; the partial record is returned with
/// complete = false and the failure message.
TrajectoryResult run_trajectory(const ParticleEnsemble& x0, const EnergySpec& spec, const SchemeConfig& cfg,
                                std::size_t save_every);

}  // namespace wgflow
