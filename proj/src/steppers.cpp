#include "wgflow/steppers.hpp"

#include "wgflow/errors.hpp"
#include "wgflow/metrics.hpp"
#include "wgflow/simd/kernels.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace wgflow {

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::explicit_euler: return "explicit_euler";
        case SchemeKind::implicit_euler: return "implicit_euler";
        case SchemeKind::trapezoid: return "trapezoid";
    }
    return "trapezoid";
}

std::string to_string(InnerKind kind) {
    return kind == InnerKind::fixed_point ? "fixed_point" : "prox_descent";
}

SchemeKind parse_scheme_kind(const std::string& s) {
    if (s == "explicit_euler") return SchemeKind::explicit_euler;
    if (s == "implicit_euler") return SchemeKind::implicit_euler;
    if (s == "trapezoid") return SchemeKind::trapezoid;
    throw ConfigError("unknown scheme kind: " + s);
}

InnerKind parse_inner_kind(const std::string& s) {
    if (s == "fixed_point") return InnerKind::fixed_point;
    if (s == "prox_descent") return InnerKind::prox_descent;
    throw ConfigError("unknown inner solver kind: " + s);
}

void SchemeConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("time step tau must be positive");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ParameterError("t_final must be positive");
    if (!(inner.tol > 0.0)) throw ParameterError("inner tolerance must be positive");
    if (inner.max_iters < 1) throw ParameterError("inner max_iters must be at least 1");
    if (inner.descent_rate && !(*inner.descent_rate > 0.0)) throw ParameterError("descent rate must be positive");
    if (scheme == SchemeKind::trapezoid && declared_lambda && *declared_lambda < 0.0 &&
        !(*declared_lambda / 2.0 + 1.0 / tau > 0.0)) {
        throw ParameterError("trapezoid step requires lambda/2 + 1/tau > 0 for the declared lambda");
    }
}

std::size_t SchemeConfig::step_count() const {
    const double q = t_final / tau;
    const double nearest = std::round(q);
    if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(std::max(1.0, nearest));
    return static_cast<std::size_t>(std::ceil(q));
}

ParticleEnsemble explicit_euler_step(const ParticleEnsemble& x, const EnergySpec& spec, double tau) {
    if (!(tau > 0.0)) throw ParameterError("time step tau must be positive");
    const GradientField g = wasserstein_gradient(x, spec);
    ParticleEnsemble next(x.size(), x.dim());
    simd::active_kernels().axpy2(x.flat().data(), g.flat().data(), nullptr, tau, next.flat().data(),
                                 x.flat().size());
    return next;
}

Stepper::Stepper(EnergySpec spec, SchemeConfig cfg) : spec_(std::move(spec)), cfg_(std::move(cfg)) {
    spec_.validate();
    cfg_.validate();
    if (cfg_.inner.descent_rate) rate_ = cfg_.inner.descent_rate;
}

double Stepper::resolve_rate(const ParticleEnsemble& x) {
    if (!rate_) {
        const double radius = 1e-3 * (1.0 + x.rms_radius());
        const double lip = estimate_lipschitz(spec_, x, 8, radius, 0);
        const double curvature = cfg_.scheme == SchemeKind::trapezoid ? 0.5 * lip : lip;
        rate_ = 1.0 / (1.0 / cfg_.tau + curvature);
    }
    return *rate_;
}

StepResult Stepper::step(const ParticleEnsemble& x, const GradientField& gx) {
    require_comparable(x, gx, "Stepper::step");
    if (cfg_.scheme == SchemeKind::explicit_euler) return explicit_step(x, gx);
    return implicit_step(x, gx);
}

StepResult Stepper::explicit_step(const ParticleEnsemble& x, const GradientField& gx) const {
    StepResult r;
    r.next = ParticleEnsemble(x.size(), x.dim());
    simd::active_kernels().axpy2(x.flat().data(), gx.flat().data(), nullptr, cfg_.tau, r.next.flat().data(),
                                 x.flat().size());
    r.gradient_at_next = wasserstein_gradient(r.next, spec_);
    return r;
}

// Both implicit schemes solve xi = x - tau * (w_new g(xi) + w_old g(x)) with
// (w_new, w_old) = (1, 0) for implicit Euler and (1/2, 1/2) for the trapezoid.
StepResult Stepper::implicit_step(const ParticleEnsemble& x, const GradientField& gx) {
    const auto& kernels = simd::active_kernels();
    const bool trapezoid = cfg_.scheme == SchemeKind::trapezoid;
    const double tau = cfg_.tau;
    const double scale = trapezoid ? 0.5 * tau : tau;
    const std::size_t len = x.flat().size();
    const double* xd = x.flat().data();
    const double* gxd = trapezoid ? gx.flat().data() : nullptr;

    auto defect = [&](const ParticleEnsemble& xi, const GradientField& gxi) {
        // |xi - (x - scale (g(xi) + g(x)))|
        ParticleEnsemble target(x.size(), x.dim());
        kernels.axpy2(xd, gxi.flat().data(), gxd, scale, target.flat().data(), len);
        return l2_reference_distance(xi, target);
    };

    // Warm start: explicit Euler.
    ParticleEnsemble xi(x.size(), x.dim());
    kernels.axpy2(xd, gx.flat().data(), nullptr, tau, xi.flat().data(), len);
    GradientField gxi = wasserstein_gradient(xi, spec_);

    const bool descent = cfg_.inner.kind == InnerKind::prox_descent;
    const double rate = descent ? resolve_rate(x) : 0.0;
    double best = std::numeric_limits<double>::infinity();
    ParticleEnsemble candidate(x.size(), x.dim());

    for (int iter = 1; iter <= cfg_.inner.max_iters; ++iter) {
        if (descent) {
            // xi <- xi - rate * (w_new g(xi) + w_old g(x) + (xi - x)/tau); the
            // fixed-point target below equals xi - tau * (that gradient).
            ParticleEnsemble target(x.size(), x.dim());
            kernels.axpy2(xd, gxi.flat().data(), gxd, scale, target.flat().data(), len);
            const double mix = rate / tau;
            auto dst = candidate.flat();
            const auto cur = xi.flat();
            const auto tgt = target.flat();
            for (std::size_t k = 0; k < len; ++k) dst[k] = cur[k] + mix * (tgt[k] - cur[k]);
        } else {
            kernels.axpy2(xd, gxi.flat().data(), gxd, scale, candidate.flat().data(), len);
        }
        const double change = l2_reference_distance(candidate, xi);
        if (!std::isfinite(change)) {
            throw InnerSolverError("inner solver diverged (non-finite iterate)", best, iter);
        }
        std::swap(xi, candidate);
        gxi = wasserstein_gradient(xi, spec_);
        const double residual = defect(xi, gxi);
        best = std::min(best, residual);
        if (change <= cfg_.inner.tol && (!descent || residual <= cfg_.inner.tol)) {
            StepResult r;
            r.next = std::move(xi);
            r.inner_iterations = iter;
            r.residual = residual;
            r.gradient_at_next = std::move(gxi);
            return r;
        }
    }
    throw InnerSolverError("inner solver did not converge within " + std::to_string(cfg_.inner.max_iters) +
                               " iterations (best residual " + format_double(best) + ")",
                           best, cfg_.inner.max_iters);
}

StepResult implicit_euler_step(const ParticleEnsemble& x, const EnergySpec& spec, const SchemeConfig& cfg) {
    SchemeConfig c = cfg;
    c.scheme = SchemeKind::implicit_euler;
    Stepper stepper(spec, c);
    return stepper.step(x, wasserstein_gradient(x, spec));
}

StepResult trapezoid_step(const ParticleEnsemble& x, const EnergySpec& spec, const SchemeConfig& cfg) {
    SchemeConfig c = cfg;
    c.scheme = SchemeKind::trapezoid;
    Stepper stepper(spec, c);
    return stepper.step(x, wasserstein_gradient(x, spec));
}

TrajectoryResult run_trajectory(const ParticleEnsemble& x0, const EnergySpec& spec, const SchemeConfig& cfg,
                                std::size_t save_every) {
    if (save_every == 0) throw ParameterError("save_every must be positive");
    Stepper stepper(spec, cfg);
    const std::size_t steps = cfg.step_count();

    TrajectoryResult out;
    TrajectoryRecord& rec = out.record;
    rec.scheme = cfg.scheme;
    rec.tau = cfg.tau;
    rec.spec_digest = spec_digest(spec);
    rec.lambda = cfg.declared_lambda;
    rec.lipschitz = cfg.declared_lipschitz;
    rec.rows.reserve(steps);

    ParticleEnsemble x = x0;
    GradientField gx = wasserstein_gradient(x, spec);
    rec.initial = {0, 0.0, energy_value(x, spec), field_norm(gx), 0.0, 0.0, 0};
    out.snapshots.emplace_back(0, x);

    for (std::size_t n = 1; n <= steps; ++n) {
        StepResult r;
        try {
            r = stepper.step(x, gx);
        } catch (const InnerSolverError& e) {
            rec.complete = false;
            rec.failure = "step " + std::to_string(n) + ": " + e.what();
            break;
        }
        TrajectoryRow row;
        row.step = n;
        row.t = static_cast<double>(n) * cfg.tau;
        row.energy = energy_value(r.next, spec);
        row.grad_norm = field_norm(r.gradient_at_next);
        row.step_displacement = l2_reference_distance(r.next, x);
        row.residual = r.residual;
        row.inner_iterations = r.inner_iterations;
        rec.rows.push_back(row);
        x = std::move(r.next);
        gx = std::move(r.gradient_at_next);
        if (n % save_every == 0 || n == steps) out.snapshots.emplace_back(n, x);
    }
    if (!rec.complete && (out.snapshots.back().first != rec.steps())) out.snapshots.emplace_back(rec.steps(), x);
    out.final_state = std::move(x);
    out.descent_rate = stepper.descent_rate();
    return out;
}

void write_record_csv(std::ostream& out, const TrajectoryRecord& rec) {
    out << "step,t,energy,grad_norm,step_displacement,residual,inner_iterations\n";
    auto emit = [&](const TrajectoryRow& r) {
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.energy) << ','
            << format_double(r.grad_norm) << ',' << format_double(r.step_displacement) << ','
            << format_double(r.residual) << ',' << r.inner_iterations << '\n';
    };
    emit(rec.initial);
    for (const auto& r : rec.rows) emit(r);
    out << "# scheme=" << to_string(rec.scheme) << '\n';
    out << "# tau=" << format_double(rec.tau) << '\n';
    out << "# spec_digest=" << rec.spec_digest << '\n';
    if (rec.lambda) out << "# lambda=" << format_double(*rec.lambda) << '\n';
    if (rec.lipschitz) out << "# L=" << format_double(*rec.lipschitz) << '\n';
    out << "# complete=" << (rec.complete ? "true" : "false") << '\n';
    if (!rec.failure.empty()) out << "# failure=" << rec.failure << '\n';
}

namespace {

double parse_number(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("record CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

TrajectoryRecord read_record_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("record CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "step,t,energy,grad_norm,step_displacement,residual,inner_iterations") {
        throw ConfigError("record CSV has an unexpected header: " + line);
    }
    TrajectoryRecord rec;
    bool have_initial = false;
    bool have_tau = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = line.substr(line.find_first_not_of("# "));
            const auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = body.substr(0, eq);
            const std::string value = body.substr(eq + 1);
            if (key == "scheme") rec.scheme = parse_scheme_kind(value);
            else if (key == "tau") { rec.tau = parse_number(value, line_no); have_tau = true; }
            else if (key == "spec_digest") rec.spec_digest = value;
            else if (key == "lambda") rec.lambda = parse_number(value, line_no);
            else if (key == "L") rec.lipschitz = parse_number(value, line_no);
            else if (key == "complete") rec.complete = value == "true";
            else if (key == "failure") rec.failure = value;
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 7) throw ConfigError("record CSV line " + std::to_string(line_no) + ": expected 7 fields");
        TrajectoryRow row;
        row.step = static_cast<std::size_t>(parse_number(fields[0], line_no));
        row.t = parse_number(fields[1], line_no);
        row.energy = parse_number(fields[2], line_no);
        row.grad_norm = parse_number(fields[3], line_no);
        row.step_displacement = parse_number(fields[4], line_no);
        row.residual = parse_number(fields[5], line_no);
        row.inner_iterations = static_cast<int>(parse_number(fields[6], line_no));
        const std::size_t expected = have_initial ? rec.rows.size() + 1 : 0;
        if (row.step != expected) throw ConfigError("record CSV line " + std::to_string(line_no) + ": steps out of order");
        if (!have_initial) {
            rec.initial = row;
            have_initial = true;
        } else {
            rec.rows.push_back(row);
        }
    }
    if (!have_initial) throw ConfigError("record CSV has no rows");
    if (!have_tau) {
        if (rec.rows.empty()) throw ConfigError("record CSV lacks tau metadata");
        rec.tau = rec.rows.front().t - rec.initial.t;
    }
    return rec;
}

TrajectoryRecord read_record_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open record: " + path);
    return read_record_csv(in);
}

}  // namespace wgflow
