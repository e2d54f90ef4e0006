// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "support.hpp"

#include "wgflow/bounds.hpp"
#include "wgflow/config.hpp"
#include "wgflow/convergence.hpp"
#include "wgflow/diagnostics.hpp"
#include "wgflow/energy.hpp"
#include "wgflow/metrics.hpp"
#include "wgflow/steppers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace wgflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << o.detail << " (" << timing
              << ")" << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
    std::ostringstream ss;
    ss.precision(digits);
    ss << v;
    return ss.str();
}

SweepPlan oracle_plan(SchemeKind scheme) {
    SweepPlan plan;
    plan.oracle = AnalyticOracle::quadratic_confinement(1.0);
    plan.spec = plan.oracle->energy();
    plan.x0 = testsupport::line({1.0});
    plan.scheme = scheme;
    plan.inner.tol = 1e-14;
    for (int k = 4; k <= 9; ++k) plan.taus.push_back(Rational(1, 1 << k));
    plan.t_final = Rational(1);
    return plan;
}

Outcome order_in_band(SchemeKind scheme, double lo, double hi, double max_seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run_sweep(oracle_plan(scheme));
    const double secs = seconds_since(t0);
    if (!report.fit) return {false, "no fit"};
    const double p = report.fit->p;
    const bool ok = p >= lo && p <= hi && secs < max_seconds;
    return {ok, "p=" + fmt(p) + " (band [" + fmt(lo) + ", " + fmt(hi) + "]), runtime " + fmt(secs, 3) + " s < " +
                    fmt(max_seconds) + " s"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_path(const std::string& name) { return std::string(WGFLOW_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wgflow_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

const char* const kFig1Sweep = " sweep --config " WGFLOW_CONFIG_DIR
                               "/fig1.json --taus 1/64,1/128,1/256,1/512,1/1024 --tau-ref 1/4096 --t-final 2";

int run_fig1_sweep(const std::string& threads, const fs::path& out) {
    const std::string cmd = "WGFLOW_THREADS=" + threads + " \"" WGFLOW_CLI_PATH "\"" + std::string(kFig1Sweep) +
                            " --out \"" + out.string() + "\" > /dev/null";
    return std::system(cmd.c_str());
}

double parse_fitted_order(const std::string& csv) {
    const auto at = csv.find("# fitted_order=");
    if (at == std::string::npos) return std::nan("");
    return std::stod(csv.substr(at + 15));
}

// Brute-force grid sup of |Xdot_t - Xdot_s - (t - s) Xddot_s| / |t - s| for X(t) = e^{-a t} x0.
double grid_curvature(double a, double x0, double horizon, int points) {
    double best = 0.0;
    for (int i = 0; i <= points; ++i) {
        for (int j = 0; j <= points; ++j) {
            if (i == j) continue;
            const double t = horizon * i / points;
            const double s = horizon * j / points;
            const double vt = -a * std::exp(-a * t) * x0;
            const double vs = -a * std::exp(-a * s) * x0;
            const double acc = a * a * std::exp(-a * s) * x0;
            best = std::max(best, std::abs(vt - vs - (t - s) * acc) / std::abs(t - s));
        }
    }
    return best;
}

EnergySpec random_spec(std::uint64_t seed) {
    const CounterRng rng(seed, 777);
    auto u = [&](std::uint64_t k) { return rng.uniform(k); };
    EnergySpec s;
    const int fk = static_cast<int>(u(0) * 3);
    if (fk == 0) s.internal = ScalarField1D::identity();
    if (fk == 1) s.internal = ScalarField1D::quadratic(0.5 + 1.5 * u(1));
    if (fk == 2) s.internal = ScalarField1D::log_regularized(0.2 + u(1), 0.1 + 0.9 * u(2));
    s.sigma = 0.5 + u(3);
    const int vk = static_cast<int>(u(4) * 3);
    if (vk == 1) s.potential = RadialPotential::quadratic(0.5 + 1.5 * u(5));
    if (vk == 2) s.potential = RadialPotential::quadratic_paper();
    const int wk = static_cast<int>(u(6) * 3);
    if (wk == 1) s.interaction = RadialPotential::quadratic(0.5 + 1.5 * u(7));
    if (wk == 2) s.interaction = RadialPotential::log_regularized(u(7) - 0.5, 0.2 + 0.8 * u(8));
    return s;
}

}  // namespace

int main() {
    std::cout << "wgflow acceptance (" << kToolVersion << ")" << std::endl;

    criterion(1, "second-order rate, trapezoid vs analytic oracle", [] {
        return order_in_band(SchemeKind::trapezoid, 1.95, 2.05, 1.0);
    });

    criterion(2, "first-order baseline, implicit Euler vs analytic oracle", [] {
        return order_in_band(SchemeKind::implicit_euler, 0.9, 1.1, 1.0);
    });

    const fs::path sweep1 = scratch("threads1");
    const fs::path sweep8 = scratch("threads8");
    criterion(3, "fig1 config sweep (tau_ref = 1/4096)", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = run_fig1_sweep("1", sweep1);
        const double secs = seconds_since(t0);
        if (rc != 0) return Outcome{false, "sweep exited with status " + std::to_string(rc)};
        const double p = parse_fitted_order(slurp(sweep1 / "convergence.csv"));
        return Outcome{p >= 1.8 && secs < 600.0,
                       "p=" + fmt(p) + " >= 1.8, runtime " + fmt(secs, 3) + " s < 600 s"};
    });

    criterion(4, "fig2 config: almost-decreasing energy and inner residuals", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const RunConfig cfg = load_run_config(config_path("fig2.json"));
        const auto res = run_trajectory(generate_initial(cfg), cfg.energy, cfg.scheme_config(), cfg.save_every);
        const auto report = diagnostics::check_energy_almost_decreasing(res.record, 1e-8);
        double worst_residual = 0.0;
        for (const auto& row : res.record.rows) worst_residual = std::max(worst_residual, row.residual);
        const double secs = seconds_since(t0);
        const bool ok = res.record.complete && res.record.steps() == 10 && report.pass && worst_residual <= 1e-10 &&
                        secs < 60.0;
        return Outcome{ok, std::to_string(res.record.steps()) + " steps, min slack " + fmt(report.min_slack) +
                               ", max residual " + fmt(worst_residual) + " <= 1e-10"};
    });

    criterion(5, "gradient norms non-increasing on every lambda >= 0 shipped config", [] {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(WGFLOW_CONFIG_DIR)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        int checked = 0;
        std::string detail;
        bool ok = true;
        for (const auto& f : files) {
            const RunConfig cfg = load_run_config(f.string());
            if (!cfg.lambda || *cfg.lambda < 0.0 || cfg.scheme != SchemeKind::trapezoid) continue;
            const auto res = run_trajectory(generate_initial(cfg), cfg.energy, cfg.scheme_config(), cfg.save_every);
            // lambda >= 0 makes the factor 1: gamma(n+1)^2 <= gamma(n)^2 (1 + 1e-10).
            const auto report = diagnostics::check_gradient_decay(res.record, *cfg.lambda, 1e-10);
            ok = ok && res.record.complete && report.pass;
            ++checked;
            detail += f.filename().string() + (report.pass ? " ok; " : " FAILED; ");
        }
        return Outcome{ok && checked > 0, std::to_string(checked) + " configs: " + detail};
    });

    criterion(6, "refined decay suite on the quadratic oracle (a = lambda = L = 1, tau = 0.1)", [] {
        SchemeConfig c;
        c.tau = 0.1;
        c.t_final = 1.0;
        c.inner.tol = 1e-14;
        EnergySpec spec;
        spec.potential = RadialPotential::quadratic(1.0);
        const auto rec = run_trajectory(testsupport::line({1.0}), spec, c, 1).record;
        const auto report = diagnostics::check_refined_decay(rec, 1.0, 1.0, 0.0);
        const double ltl = bounds::lambda_tau_L(1.0, 0.1, 1.0);
        const double factor = std::exp(-2.0 * ltl * 0.1);
        double worst_ratio = 0.0;
        for (std::size_t n = 0; n < rec.steps(); ++n) {
            worst_ratio = std::max(worst_ratio, std::pow(rec.gamma(n + 1) / rec.gamma(n), 2));
        }
        const bool ok = report.pass && report.min_slack >= 0.0 && std::abs(ltl - 0.86976654) < 5e-9 &&
                        worst_ratio <= factor;
        return Outcome{ok, "min slack " + fmt(report.min_slack) + " >= 0, lambda_tau_L " + fmt(ltl, 10) +
                               ", max gamma ratio^2 " + fmt(worst_ratio) + " <= " + fmt(factor)};
    });

    criterion(7, "exact W2 against brute-force permutations (200 pairs)", [] {
        double worst = 0.0;
        bool below_l2 = true;
        for (std::uint64_t s = 0; s < 200; ++s) {
            const CounterRng pick(s, 99);
            const std::size_t n = 1 + static_cast<std::size_t>(pick.uniform(0) * 8);
            const std::size_t d = 1 + static_cast<std::size_t>(pick.uniform(1) * 3);
            const auto a = testsupport::random_ensemble(n, d, 1000 + s, 0);
            const auto b = testsupport::random_ensemble(n, d, 1000 + s, 1);
            const double w = exact_w2(a, b);
            worst = std::max(worst, std::abs(w - testsupport::brute_force_w2(a, b)));
            below_l2 = below_l2 && w <= l2_reference_distance(a, b);
        }
        return Outcome{worst <= 1e-12 && below_l2, "max |exact - brute| " + fmt(worst) +
                                                       (below_l2 ? ", W2 <= L2 always" : ", W2 > L2 seen")};
    });

    criterion(8, "gradient consistency with central differences (50 cases)", [] {
        double worst_order = INFINITY;
        for (std::uint64_t c = 0; c < 50; ++c) {
            const CounterRng pick(c, 55);
            const std::size_t n = 2 + static_cast<std::size_t>(pick.uniform(0) * 7);
            const std::size_t d = 1 + static_cast<std::size_t>(pick.uniform(1) * 3);
            const EnergySpec spec = random_spec(c);
            const auto x = testsupport::random_ensemble(n, d, 5000 + c, 0);
            const auto v = testsupport::random_ensemble(n, d, 5000 + c, 1);
            const auto g = wasserstein_gradient(x, spec);
            double exact = 0.0;
            for (std::size_t k = 0; k < g.flat().size(); ++k) exact += g.flat()[k] * v.flat()[k];
            exact /= static_cast<double>(n);
            const double scale = 1.0 + x.rms_radius();
            std::vector<std::pair<double, double>> pts;
            for (double h0 : {1e-2, 1e-3, 1e-4}) {
                const double h = h0 * scale;
                auto at = [&](double t) {
                    ParticleEnsemble y = x;
                    for (std::size_t k = 0; k < y.flat().size(); ++k) y.flat()[k] += t * v.flat()[k];
                    return energy_value(y, spec);
                };
                pts.emplace_back(h, std::abs((at(h) - at(-h)) / (2.0 * h) - exact));
            }
            worst_order = std::min(worst_order, fit_order(pts).p);
        }
        return Outcome{worst_order >= 1.9, "min observed FD order " + fmt(worst_order) + " >= 1.9"};
    });

    criterion(9, "observed error below the smooth bound on the oracle sweep", [] {
        const double a = 1.0;
        const double horizon = 1.0;
        const double curvature = a * 1.0 * (std::exp(-a * horizon) - 1.0 + a * horizon) / horizon;
        const double grid = grid_curvature(a, 1.0, horizon, 400);
        SweepPlan plan = oracle_plan(SchemeKind::trapezoid);
        bounds::BoundInputs in;
        in.lipschitz = a;
        in.curvature = curvature;
        plan.overlay = in;
        const auto report = run_sweep(plan);
        double worst = 0.0;
        bool ok = grid <= curvature * (1.0 + 1e-12) && grid >= 0.99 * curvature;
        for (const auto& row : report.rows) {
            ok = ok && !row.failed && row.bound_overlay && row.terminal_error <= *row.bound_overlay;
            if (row.bound_overlay) worst = std::max(worst, row.terminal_error / *row.bound_overlay);
        }
        return Outcome{ok, "curvature " + fmt(curvature) + " (grid sup " + fmt(grid) + "), max error/bound " +
                               fmt(worst) + " <= 1"};
    });

    criterion(10, "determinism: fig1 sweep with 1 and 8 worker threads", [&] {
        if (!fs::exists(sweep1 / "convergence.csv")) return Outcome{false, "criterion 3 produced no CSV"};
        const int rc = run_fig1_sweep("8", sweep8);
        if (rc != 0) return Outcome{false, "sweep exited with status " + std::to_string(rc)};
        const std::string one = slurp(sweep1 / "convergence.csv");
        const std::string eight = slurp(sweep8 / "convergence.csv");
        return Outcome{!one.empty() && one == eight,
                       one == eight ? "convergence CSVs byte-identical (" + std::to_string(one.size()) + " bytes)"
                                    : "convergence CSVs differ"};
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
