#include "wgflow/convergence.hpp"

#include "wgflow/errors.hpp"
#include "wgflow/metrics.hpp"
#include "wgflow/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace wgflow {

EnergySpec AnalyticOracle::energy() const {
    EnergySpec spec;
    if (kind == Kind::quadratic_confinement) {
        spec.potential = RadialPotential::quadratic(a);
    } else {
        spec.interaction = RadialPotential::quadratic(1.0);
    }
    return spec;
}

std::string to_string(AnalyticOracle::Kind kind) {
    switch (kind) {
        case AnalyticOracle::Kind::quadratic_confinement: return "quadratic_confinement";
        case AnalyticOracle::Kind::quadratic_interaction: return "quadratic_interaction";
    }
    return "unknown";
}

AnalyticOracle::Kind parse_oracle_kind(const std::string& s) {
    if (s == "quadratic_confinement") return AnalyticOracle::Kind::quadratic_confinement;
    if (s == "quadratic_interaction") return AnalyticOracle::Kind::quadratic_interaction;
    throw ParameterError("unsupported analytic oracle '" + s + "'");
}

ParticleEnsemble analytic_oracle(const AnalyticOracle& oracle, const ParticleEnsemble& x0, double t) {
    ParticleEnsemble out = x0;
    const std::size_t n = x0.size();
    const std::size_t d = x0.dim();
    if (t == 0.0) return out;
    if (oracle.kind == AnalyticOracle::Kind::quadratic_confinement) {
        const double s = std::exp(-oracle.a * t);
        for (double& v : out.flat()) v *= s;
        return out;
    }
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) centroid[k] += x0.point(i)[k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);
    const double s = std::exp(-t);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = out.point(i);
        for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + (x0.point(i)[k] - centroid[k]) * s;
    }
    return out;
}

double terminal_error(const ParticleEnsemble& run, const ParticleEnsemble& ref) {
    return l2_reference_distance(run, ref);
}

double terminal_error(const ParticleEnsemble& run, const Rational& run_time, const ParticleEnsemble& ref,
                      const Rational& ref_time) {
    if (!(run_time == ref_time)) {
        throw PlanError("terminal times differ: " + run_time.to_string() + " vs " + ref_time.to_string());
    }
    return terminal_error(run, ref);
}

OrderFit fit_order(const std::vector<std::pair<double, double>>& points) {
    std::vector<std::pair<double, double>> logs;
    for (const auto& [tau, err] : points) {
        if (tau > 0.0 && err > 0.0 && std::isfinite(tau) && std::isfinite(err)) {
            logs.emplace_back(std::log(tau), std::log(err));
        }
    }
    if (logs.size() < 2) throw FitError("order fit needs at least 2 points with positive error");
    const double m = static_cast<double>(logs.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : logs) {
        mx += x;
        my += y;
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : logs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw FitError("order fit needs at least 2 distinct step sizes");
    OrderFit fit;
    fit.p = sxy / sxx;
    fit.points = logs.size();
    double ss = 0.0;
    for (const auto& [x, y] : logs) {
        const double r = y - (my + fit.p * (x - mx));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / m);
    return fit;
}

void SweepPlan::validate() const {
    if (taus.empty()) throw PlanError("sweep plan has no step sizes");
    if (!(Rational(0) < t_final)) throw PlanError("final time must be positive");
    if (tau_ref.has_value() == oracle.has_value()) {
        throw PlanError("sweep plan needs exactly one reference: tau_ref or an analytic oracle");
    }
    if (x0.size() == 0) throw PlanError("sweep plan has an empty initial ensemble");
    for (const auto& tau : taus) {
        if (!divides_evenly(tau, t_final)) {
            throw PlanError("tau = " + tau.to_string() + " does not divide T = " + t_final.to_string());
        }
    }
    if (tau_ref) {
        if (!divides_evenly(*tau_ref, t_final)) {
            throw PlanError("tau_ref = " + tau_ref->to_string() + " does not divide T = " + t_final.to_string());
        }
        const Rational coarsest_fine = *std::min_element(taus.begin(), taus.end());
        if (!(*tau_ref < coarsest_fine)) {
            throw PlanError("tau_ref = " + tau_ref->to_string() + " must be smaller than every tau");
        }
    }
}

namespace {

SchemeConfig member_config(const SweepPlan& plan, const Rational& tau) {
    SchemeConfig cfg;
    cfg.scheme = plan.scheme;
    cfg.tau = tau.to_double();
    cfg.t_final = plan.t_final.to_double();
    cfg.inner = plan.inner;
    cfg.declared_lambda = plan.declared_lambda;
    cfg.declared_lipschitz = plan.declared_lipschitz;
    return cfg;
}

struct MemberRun {
    ParticleEnsemble final_state;
    std::size_t steps = 0;
    bool failed = false;
    std::string failure;
    double wall_seconds = 0.0;
};

MemberRun run_member(const SweepPlan& plan, const Rational& tau) {
    MemberRun out;
    const auto start = std::chrono::steady_clock::now();
    const SchemeConfig cfg = member_config(plan, tau);
    out.steps = static_cast<std::size_t>((plan.t_final / tau).num());
    try {
        cfg.validate();
        TrajectoryResult res = run_trajectory(plan.x0, plan.spec, cfg, std::max<std::size_t>(out.steps, 1));
        if (!res.record.complete || res.record.steps() != out.steps) {
            out.failed = true;
            out.failure = res.record.failure.empty() ? "incomplete trajectory" : res.record.failure;
        }
        out.final_state = std::move(res.final_state);
    } catch (const Error& e) {
        out.failed = true;
        out.failure = e.what();
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

ConvergenceReport run_sweep(const SweepPlan& plan) {
    plan.validate();
    plan.spec.validate();

    std::vector<Rational> taus = plan.taus;
    std::sort(taus.begin(), taus.end(), [](const Rational& a, const Rational& b) { return b < a; });

    // The reference is one more member so it shares the worker pool.
    std::vector<Rational> members = taus;
    if (plan.tau_ref) members.push_back(*plan.tau_ref);
    std::vector<MemberRun> runs(members.size());
    const std::size_t workers = std::min(configured_threads(), members.size());
    parallel_for(members.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) runs[i] = run_member(plan, members[i]);
    });

    ConvergenceReport report;
    ParticleEnsemble reference;
    if (plan.oracle) {
        report.reference = "analytic:" + to_string(plan.oracle->kind);
        reference = analytic_oracle(*plan.oracle, plan.x0, plan.t_final.to_double());
    } else {
        const MemberRun& ref = runs.back();
        report.reference = "tau_ref=" + plan.tau_ref->to_string();
        report.reference_wall_seconds = ref.wall_seconds;
        if (ref.failed) throw PlanError("reference run failed: " + ref.failure);
        reference = ref.final_state;
    }

    std::vector<std::pair<double, double>> usable;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        SweepRow row;
        row.tau = taus[i];
        row.steps = runs[i].steps;
        row.failed = runs[i].failed;
        row.failure = runs[i].failure;
        row.wall_seconds = runs[i].wall_seconds;
        if (!row.failed) {
            row.terminal_error = terminal_error(runs[i].final_state, reference);
            usable.emplace_back(row.tau.to_double(), row.terminal_error);
        } else {
            row.terminal_error = std::nan("");
        }
        try {
            row.fitted_p_cumulative = fit_order(usable).p;
        } catch (const FitError&) {
        }
        if (plan.overlay) {
            bounds::BoundInputs in = *plan.overlay;
            in.tau = row.tau.to_double();
            in.horizon = plan.t_final.to_double();
            try {
                row.bound_overlay = bounds::smooth_error_bound(in);
            } catch (const DomainError&) {
            }
        }
        report.rows.push_back(std::move(row));
    }
    try {
        report.fit = fit_order(usable);
    } catch (const FitError&) {
    }
    return report;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
    out << "tau,steps,terminal_error,fitted_p_cumulative,bound_overlay\n";
    for (const auto& r : report.rows) {
        out << r.tau.to_string() << ',' << r.steps << ',';
        if (r.failed) {
            out << "failed";
        } else {
            out << format_double(r.terminal_error);
        }
        out << ',';
        if (r.fitted_p_cumulative) out << format_double(*r.fitted_p_cumulative);
        out << ',';
        if (r.bound_overlay) out << format_double(*r.bound_overlay);
        out << '\n';
    }
    if (report.fit) {
        out << "# fitted_order=" << format_double(report.fit->p) << " residual=" << format_double(report.fit->residual)
            << '\n';
    } else {
        out << "# fitted_order=nan residual=nan\n";
    }
}

}  // namespace wgflow
