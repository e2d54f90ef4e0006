#include "wgflow/cli.hpp"

#include "wgflow/bounds.hpp"
#include "wgflow/config.hpp"
#include "wgflow/convergence.hpp"
#include "wgflow/diagnostics.hpp"
#include "wgflow/errors.hpp"
#include "wgflow/rng.hpp"
#include "wgflow/simd/kernels.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace wgflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<Rational> parse_rational_list(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(Rational::parse(item));
    }
    if (out.empty()) throw ConfigError("empty step-size list");
    return out;
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    body(f);
    if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string snapshot_name(std::size_t step) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "snapshot_%08zu.csv", step);
    return buf;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    write_text(dir / "manifest.json", [&](std::ostream& o) { o << m.to_json().dump(2) << '\n'; });
}

RunManifest base_manifest(const RunConfig& cfg, const ParticleEnsemble& x0) {
    RunManifest m;
    m.config = to_json(cfg);
    m.spec_digest = spec_digest(cfg.energy);
    m.initial_digest = ensemble_digest(x0);
    m.inner_kind = to_string(cfg.inner.kind);
    m.inner_tol = cfg.inner.tol;
    m.inner_max_iters = cfg.inner.max_iters;
    m.simd = std::string(simd::active_kernels().name);
    return m;
}

struct SimulateArgs {
    std::string config;
    std::string out;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    const RunConfig cfg = load_run_config(a.config);
    const fs::path dir = a.out.empty() ? fs::path(cfg.out_dir) : fs::path(a.out);
    fs::create_directories(dir);
    const ParticleEnsemble x0 = generate_initial(cfg);

    const auto start = std::chrono::steady_clock::now();
    const TrajectoryResult res = run_trajectory(x0, cfg.energy, cfg.scheme_config(), cfg.save_every);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_text(dir / "trajectory.csv", [&](std::ostream& o) { write_record_csv(o, res.record); });
    for (const auto& [step, e] : res.snapshots) write_snapshot_csv((dir / snapshot_name(step)).string(), e);

    RunManifest m = base_manifest(cfg, x0);
    m.wall_seconds = wall;
    m.descent_rate = res.descent_rate;
    m.complete = res.record.complete;
    m.failure = res.record.failure;
    write_manifest(dir, m);

    out << "steps=" << res.record.steps() << " complete=" << (res.record.complete ? "true" : "false")
        << " out=" << dir.string() << '\n';
    if (!res.record.complete) {
        out << "failure: " << res.record.failure << '\n';
        return kExitValidation;
    }
    return kExitOk;
}

struct SweepArgs {
    std::string config;
    std::string taus;
    std::string tau_ref;
    std::string t_final;
    std::string out;
    std::string oracle;
    double oracle_a = 1.0;
    std::optional<double> lipschitz;
    std::optional<double> curvature;
    double init_error = 0.0;
    double alpha = 1.0;
};

int run_sweep_cmd(const SweepArgs& a, std::ostream& out) {
    const RunConfig cfg = load_run_config(a.config);
    SweepPlan plan;
    plan.x0 = generate_initial(cfg);
    plan.scheme = cfg.scheme;
    plan.inner = cfg.inner;
    plan.declared_lambda = cfg.lambda;
    plan.declared_lipschitz = cfg.lipschitz;
    plan.taus = parse_rational_list(a.taus);
    if (!a.t_final.empty()) {
        plan.t_final = Rational::parse(a.t_final);
    } else if (cfg.t_final.exact) {
        plan.t_final = *cfg.t_final.exact;
    } else {
        throw ConfigError("sweep needs --t-final or an exact \"p/q\" scheme.t_final in the config");
    }
    if (!a.oracle.empty()) {
        plan.oracle = AnalyticOracle{parse_oracle_kind(a.oracle), a.oracle_a};
        plan.spec = plan.oracle->energy();
    } else {
        if (a.tau_ref.empty()) throw ConfigError("sweep needs --tau-ref or --oracle");
        plan.tau_ref = Rational::parse(a.tau_ref);
        plan.spec = cfg.energy;
    }
    if (a.lipschitz && a.curvature) {
        bounds::BoundInputs in;
        in.lipschitz = *a.lipschitz;
        in.curvature = *a.curvature;
        in.init_error = a.init_error;
        in.alpha = a.alpha;
        plan.overlay = in;
    }

    const auto start = std::chrono::steady_clock::now();
    const ConvergenceReport report = run_sweep(plan);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path dir = a.out.empty() ? fs::path(cfg.out_dir) : fs::path(a.out);
    fs::create_directories(dir);
    write_text(dir / "convergence.csv", [&](std::ostream& o) { write_convergence_csv(o, report); });

    RunManifest m = base_manifest(cfg, plan.x0);
    m.spec_digest = spec_digest(plan.spec);
    m.wall_seconds = wall;
    json j = m.to_json();
    j["sweep"] = {{"taus", a.taus}, {"t_final", plan.t_final.to_string()}, {"reference", report.reference}};
    json timing = json::array();
    for (const auto& r : report.rows) {
        timing.push_back({{"tau", r.tau.to_string()}, {"wall_seconds", r.wall_seconds}, {"failed", r.failed}});
    }
    j["sweep"]["members"] = timing;
    j["sweep"]["reference_wall_seconds"] = report.reference_wall_seconds;
    write_text(dir / "manifest.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });

    write_convergence_csv(out, report);
    return report.fit ? kExitOk : kExitValidation;
}

struct ProbeArgs {
    std::string config;
    int directions = 8;
    std::optional<double> h;
    std::uint64_t seed = 0;
};

int run_probe(const ProbeArgs& a, std::ostream& out) {
    if (a.directions < 1) throw ConfigError("--directions must be at least 1");
    const RunConfig cfg = load_run_config(a.config);
    const ParticleEnsemble x = generate_initial(cfg);
    const double h = a.h ? *a.h : default_probe_step(x);
    if (!(h > 0.0)) throw ConfigError("--h must be positive");
    out << "direction,first,second,norm_sq,second_over_norm_sq\n";
    double min_ratio = INFINITY;
    for (int k = 0; k < a.directions; ++k) {
        const CounterRng rng(a.seed, static_cast<std::uint64_t>(k));
        GradientField v(x.size(), x.dim());
        double norm_sq = 0.0;
        auto flat = v.flat();
        for (std::size_t i = 0; i < flat.size(); ++i) {
            flat[i] = rng.normal(i);
            norm_sq += flat[i] * flat[i];
        }
        norm_sq /= static_cast<double>(x.size());
        const ProbeResult r = convexity_probe(x, v, cfg.energy, h);
        const double ratio = r.second / norm_sq;
        min_ratio = std::min(min_ratio, ratio);
        out << k << ',' << format_double(r.first) << ',' << format_double(r.second) << ',' << format_double(norm_sq)
            << ',' << format_double(ratio) << '\n';
    }
    out << "# h=" << format_double(h) << " min_second_over_norm_sq=" << format_double(min_ratio) << '\n';
    return kExitOk;
}

struct BoundsArgs {
    double lambda = 0.0;
    double lipschitz = 0.0;
    double tau = 0.1;
    double horizon = 1.0;
    double init_error = 0.0;
    double init_grad = 0.0;
    double curvature = 0.0;
    double alpha = 1.0;
};

int run_bounds(const BoundsArgs& a, std::ostream& out) {
    bounds::BoundInputs in;
    in.lambda = a.lambda;
    in.lipschitz = a.lipschitz;
    in.tau = a.tau;
    in.horizon = a.horizon;
    in.init_error = a.init_error;
    in.init_grad_norm = a.init_grad;
    in.curvature = a.curvature;
    in.alpha = a.alpha;
    out << "name,value\n";
    std::size_t printed = 0;
    auto emit = [&](const char* name, const std::function<double()>& f) {
        try {
            const double v = f();
            out << name << ',' << format_double(v) << '\n';
            ++printed;
        } catch (const DomainError&) {
        }
    };
    emit("lambda_tau", [&] { return bounds::lambda_tau(a.lambda, a.tau); });
    emit("lambda_tau_L", [&] { return bounds::lambda_tau_L(a.lambda, a.tau, a.lipschitz); });
    emit("gradient_decay_factor", [&] { return bounds::gradient_decay_factor(a.lambda, a.tau); });
    emit("stability_factor", [&] { return bounds::stability_factor(a.lambda, a.tau, a.horizon); });
    emit("evi_lower_order_constant", [&] {
        return bounds::evi_lower_order_constant(bounds::lambda_tau(a.lambda, a.tau), a.horizon, a.tau);
    });
    emit("k_constant", [&] { return bounds::k_constant(bounds::lambda_tau(a.lambda, a.tau), a.horizon, a.tau); });
    emit("refined_constant", [&] { return bounds::refined_constant(a.lambda, a.lipschitz, a.horizon, a.tau); });
    emit("evi_error_bound", [&] { return bounds::evi_error_bound(in); });
    emit("refined_error_bound", [&] { return bounds::refined_error_bound(in); });
    emit("smooth_error_bound", [&] { return bounds::smooth_error_bound(in); });
    if (printed == 0) throw DomainError("no constant is defined for these inputs");
    return kExitOk;
}

struct ValidateArgs {
    std::string record;
    std::string config;
    std::optional<double> lambda;
    std::optional<double> lipschitz;
    std::optional<double> horizon;
    double tol = diagnostics::kDefaultAbsoluteTol;
    double energy_tol = diagnostics::kDefaultRelativeTol;
};

int run_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    const TrajectoryRecord rec = read_record_csv(a.record);
    if (!a.config.empty()) diagnostics::require_matching_spec(rec, load_run_config(a.config).energy);
    const std::optional<double> lambda = a.lambda ? a.lambda : rec.lambda;
    const std::optional<double> lipschitz = a.lipschitz ? a.lipschitz : rec.lipschitz;
    const double horizon = a.horizon ? *a.horizon : static_cast<double>(rec.steps()) * rec.tau;

    std::vector<diagnostics::CheckReport> reports;
    auto attempt = [&](const char* name, const std::function<diagnostics::CheckReport()>& f) {
        try {
            reports.push_back(f());
        } catch (const ApplicabilityError& e) {
            err << "skipped " << name << ": " << e.what() << '\n';
        } catch (const DomainError& e) {
            err << "skipped " << name << ": " << e.what() << '\n';
        }
    };
    if (rec.scheme == SchemeKind::trapezoid) {
        attempt("energy_almost_decreasing", [&] { return diagnostics::check_energy_almost_decreasing(rec, a.energy_tol); });
    }
    if (lambda) {
        attempt("gradient_decay", [&] { return diagnostics::check_gradient_decay(rec, *lambda, a.tol); });
        attempt("classical_stability",
                [&] { return diagnostics::check_classical_stability(rec, *lambda, horizon, a.tol); });
        if (lipschitz && *lambda >= 0.0) {
            attempt("refined_decay", [&] { return diagnostics::check_refined_decay(rec, *lambda, *lipschitz, a.tol); });
            attempt("refined_stability",
                    [&] { return diagnostics::check_refined_stability(rec, *lambda, *lipschitz, horizon, a.tol); });
        }
    }
    if (reports.empty()) throw ApplicabilityError("no check applies to this record with the given parameters");
    bool pass = true;
    for (const auto& r : reports) {
        diagnostics::write_report_csv(out, r);
        pass = pass && r.pass;
    }
    return pass ? kExitOk : kExitValidation;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Particle Wasserstein gradient flows with trapezoidal time stepping", "wgflow"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one trajectory and write its record, snapshots and manifest");
    simulate->add_option("--config", sim.config, "Run config (JSON)")->required();
    simulate->add_option("--out", sim.out, "Output directory (default: output.out_dir)");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Time-step refinement study");
    sweep->add_option("--config", sw.config, "Run config (JSON)")->required();
    sweep->add_option("--taus", sw.taus, "Comma-separated step sizes, e.g. 1/64,1/128")->required();
    sweep->add_option("--tau-ref", sw.tau_ref, "Reference step size");
    sweep->add_option("--t-final", sw.t_final, "Common final time (rational)");
    sweep->add_option("--out", sw.out, "Output directory (default: output.out_dir)");
    sweep->add_option("--oracle", sw.oracle, "Analytic reference: quadratic_confinement or quadratic_interaction");
    sweep->add_option("--oracle-a", sw.oracle_a, "Confinement strength of the analytic oracle");
    sweep->add_option("--L", sw.lipschitz, "Lipschitz constant for the bound overlay");
    sweep->add_option("--curvature", sw.curvature, "Flow-acceleration modulus for the bound overlay");
    sweep->add_option("--init-error", sw.init_error, "Initial error for the bound overlay");
    sweep->add_option("--alpha", sw.alpha, "Holder exponent for the bound overlay");

    ProbeArgs pr;
    auto* probe = app.add_subcommand("probe", "Finite-difference convexity probe along random directions");
    probe->set_help_flag("--help", "Print this help message and exit");
    probe->add_option("--config", pr.config, "Run config (JSON)")->required();
    probe->add_option("--directions", pr.directions, "Number of random directions");
    probe->add_option("--h", pr.h, "Probe step (default 1e-4 (1 + rms radius))");
    probe->add_option("--seed", pr.seed, "Direction seed");

    BoundsArgs bd;
    auto* bnd = app.add_subcommand("bounds", "Evaluate the error-bound constants");
    bnd->add_option("--lambda", bd.lambda, "Convexity modulus");
    bnd->add_option("--L", bd.lipschitz, "Gradient Lipschitz constant");
    bnd->add_option("--tau", bd.tau, "Step size");
    bnd->add_option("--T", bd.horizon, "Time horizon");
    bnd->add_option("--init-error", bd.init_error, "Initial error");
    bnd->add_option("--init-grad", bd.init_grad, "Initial lifted gradient norm");
    bnd->add_option("--curvature", bd.curvature, "Flow-acceleration modulus");
    bnd->add_option("--alpha", bd.alpha, "Holder exponent");

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Check a trajectory record against the discrete estimates");
    validate->add_option("--record", va.record, "Trajectory CSV")->required();
    validate->add_option("--config", va.config, "Run config whose energy the record must match");
    validate->add_option("--lambda", va.lambda, "Convexity modulus (default: from the record)");
    validate->add_option("--L", va.lipschitz, "Lipschitz constant (default: from the record)");
    validate->add_option("--T", va.horizon, "Horizon (default: steps * tau)");
    validate->add_option("--tol", va.tol, "Tolerance for norm inequalities");
    validate->add_option("--energy-tol", va.energy_tol, "Relative tolerance for energy inequalities");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim, out);
        if (sweep->parsed()) return run_sweep_cmd(sw, out);
        if (probe->parsed()) return run_probe(pr, out);
        if (bnd->parsed()) return run_bounds(bd, out);
        if (validate->parsed()) return run_validate(va, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

}  // namespace wgflow::cli
