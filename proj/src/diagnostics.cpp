#include "wgflow/diagnostics.hpp"

#include "wgflow/bounds.hpp"
#include "wgflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace wgflow::diagnostics {

const CheckRow* CheckReport::first_failure() const noexcept {
    for (const auto& r : rows) {
        if (!r.ok()) return &r;
    }
    return nullptr;
}

namespace {

void finalize(CheckReport& report) {
    report.min_slack = std::numeric_limits<double>::infinity();
    report.pass = true;
    for (const auto& r : report.rows) {
        report.min_slack = std::min(report.min_slack, r.slack);
        if (!r.ok()) report.pass = false;
    }
    if (report.rows.empty()) report.min_slack = 0.0;
}

void require_trapezoid(const TrajectoryRecord& rec, const char* check) {
    if (rec.scheme != SchemeKind::trapezoid) {
        throw ApplicabilityError(std::string(check) + " applies to trapezoid trajectories only (record is " +
                                 to_string(rec.scheme) + ")");
    }
}

void require_horizon(const TrajectoryRecord& rec, double horizon, const char* check) {
    if (!(horizon >= 0.0)) throw ApplicabilityError(std::string(check) + ": horizon T must be nonnegative");
    const double span = static_cast<double>(rec.steps()) * rec.tau;
    if (span > horizon * (1.0 + 1e-12) + 1e-15) {
        throw ApplicabilityError(std::string(check) + ": record spans N tau = " + format_double(span) +
                                 " > T = " + format_double(horizon));
    }
}

void require_refined(const TrajectoryRecord& rec, double lambda, double lipschitz, const char* check) {
    if (!(lambda >= 0.0)) throw ApplicabilityError(std::string(check) + " requires lambda >= 0");
    if (!(lipschitz >= 0.0)) throw ApplicabilityError(std::string(check) + " requires L >= 0");
    if (lipschitz * rec.tau > 1.0) throw ApplicabilityError(std::string(check) + " requires tau <= 1/L");
}

CheckRow make_row(std::string check, std::size_t step, double lhs, double rhs, double allowance) {
    return {std::move(check), step, lhs, rhs, rhs - lhs, allowance};
}

}  // namespace

void require_matching_spec(const TrajectoryRecord& rec, const EnergySpec& spec) {
    const std::string digest = spec_digest(spec);
    if (rec.spec_digest != digest) {
        throw ApplicabilityError("record spec digest " + rec.spec_digest + " does not match spec digest " + digest);
    }
}

CheckReport check_energy_almost_decreasing(const TrajectoryRecord& rec, double tol) {
    require_trapezoid(rec, "energy_almost_decreasing");
    CheckReport report;
    report.name = "energy_almost_decreasing";
    report.tolerance = tol;
    for (std::size_t n = 0; n < rec.steps(); ++n) {
        const double g0 = rec.gamma(n);
        const double g1 = rec.gamma(n + 1);
        const double lhs = rec.phi(n + 1) - rec.phi(n);
        const double rhs = rec.tau / 4.0 * (g0 * g0 - g1 * g1);
        report.rows.push_back(make_row(report.name, n, lhs, rhs, tol * (1.0 + std::abs(rec.phi(n)))));
    }
    finalize(report);
    return report;
}

CheckReport check_gradient_decay(const TrajectoryRecord& rec, double lambda, double tol) {
    const double factor = bounds::gradient_decay_factor(lambda, rec.tau);
    CheckReport report;
    report.name = "gradient_decay";
    report.tolerance = tol;
    for (std::size_t n = 0; n < rec.steps(); ++n) {
        const double g0 = rec.gamma(n);
        const double g1 = rec.gamma(n + 1);
        report.rows.push_back(make_row(report.name, n, g1 * g1, factor * g0 * g0, tol * g0 * g0));
    }
    finalize(report);
    return report;
}

CheckReport check_refined_decay(const TrajectoryRecord& rec, double lambda, double lipschitz, double tol) {
    require_trapezoid(rec, "refined_decay");
    require_refined(rec, lambda, lipschitz, "refined_decay");
    const double tau = rec.tau;
    const double ltl = bounds::lambda_tau_L(lambda, tau, lipschitz);
    const double contraction = std::exp(-2.0 * ltl * tau);
    const double margin = tau * (1.0 - lipschitz * tau / 2.0);
    const double disp = tau * tau * (1.0 - lipschitz * tau / 2.0);
    CheckReport report;
    report.name = "refined_decay";
    report.tolerance = tol;
    for (std::size_t n = 0; n < rec.steps(); ++n) {
        const double g0 = rec.gamma(n);
        const double g1 = rec.gamma(n + 1);
        const double d = rec.delta(n);
        const double phi0 = rec.phi(n);
        report.rows.push_back(make_row("refined_decay.energy", n, rec.phi(n + 1) + lambda / 2.0 * d * d + margin * g1 * g1,
                                       phi0, tol * (1.0 + std::abs(phi0))));
        report.rows.push_back(make_row("refined_decay.gradient", n, g1 * g1, contraction * g0 * g0, tol * g0 * g0));
        report.rows.push_back(make_row("refined_decay.displacement", n, disp * g1 * g1, d * d, tol * d * d));
    }
    finalize(report);
    return report;
}

CheckReport check_classical_stability(const TrajectoryRecord& rec, double lambda, double horizon, double tol) {
    require_horizon(rec, horizon, "classical_stability");
    const double factor = bounds::stability_factor(lambda, rec.tau, horizon);
    const double tau = rec.tau;
    const double g0 = rec.gamma(0);
    CheckReport report;
    report.name = "classical_stability";
    report.tolerance = tol;

    double sum = 0.0;
    for (std::size_t j = 0; j < rec.steps(); ++j) sum += rec.delta(j) * rec.delta(j) / tau;
    const double rhs = horizon * factor * g0 * g0;
    report.rows.push_back(make_row("classical_stability.sum", rec.steps(), sum, rhs, tol * (1.0 + rhs)));

    // Worst pair (m, n) of tau (n - m) sqrt(C~) g0 - sum_{j=m}^{n-1} delta(j):
    // a minimum-subarray-sum over per-step margins.
    const double per_step = tau * std::sqrt(factor) * g0;
    double best = std::numeric_limits<double>::infinity();
    double running = 0.0;
    std::size_t best_end = 0;
    std::size_t start = 0;
    std::size_t best_start = 0;
    for (std::size_t j = 0; j < rec.steps(); ++j) {
        const double margin = per_step - rec.delta(j);
        if (running > 0.0 || j == 0) {
            running = margin;
            start = j;
        } else {
            running += margin;
        }
        if (running < best) {
            best = running;
            best_end = j + 1;
            best_start = start;
        }
    }
    if (rec.steps() > 0) {
        double surrogate = 0.0;
        for (std::size_t j = best_start; j < best_end; ++j) surrogate += rec.delta(j);
        const double lip_rhs = per_step * static_cast<double>(best_end - best_start);
        CheckRow row = make_row("classical_stability.lipschitz", best_end, surrogate, lip_rhs, tol * (1.0 + lip_rhs));
        finalize(report);
        if (!row.ok()) {
            report.inconclusive = true;
            report.note = "Lipschitz-in-time surrogate exceeded its bound; the surrogate over-estimates |X_n - X_m|, "
                          "so this is inconclusive";
        }
        report.rows.push_back(std::move(row));
        report.min_slack = std::min(report.min_slack, report.rows.back().slack);
        return report;
    }
    finalize(report);
    return report;
}

CheckReport check_refined_stability(const TrajectoryRecord& rec, double lambda, double lipschitz, double horizon,
                                    double tol) {
    require_refined(rec, lambda, lipschitz, "refined_stability");
    require_horizon(rec, horizon, "refined_stability");
    const double tau = rec.tau;
    const double ltl = bounds::lambda_tau_L(lambda, tau, lipschitz);
    const double g0 = rec.gamma(0);
    CheckReport report;
    report.name = "refined_stability";
    report.tolerance = tol;
    double weighted = 0.0;
    for (std::size_t j = 0; j < rec.steps(); ++j) {
        const double jd = static_cast<double>(j);
        const double d = rec.delta(j);
        const double rhs = tau * std::exp(-jd * ltl * tau) * g0;
        report.rows.push_back(make_row("refined_stability.step", j, d, rhs, tol * rhs));
        weighted += std::exp(2.0 * jd * ltl * tau) * d * d / tau;
    }
    const double rhs = horizon * g0 * g0;
    report.rows.push_back(make_row("refined_stability.sum", rec.steps(), weighted, rhs, tol * (1.0 + rhs)));
    finalize(report);
    return report;
}

void write_report_csv(std::ostream& out, const CheckReport& report) {
    out << "check,step,lhs,rhs,slack\n";
    for (const auto& r : report.rows) {
        out << r.check << ',' << r.step << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
            << format_double(r.slack) << '\n';
    }
    if (report.inconclusive) out << "# note: " << report.note << '\n';
    out << "# verdict: " << (report.pass ? "pass" : "fail") << '\n';
}

}  // namespace wgflow::diagnostics
