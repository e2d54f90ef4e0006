#include "wgflow/energy.hpp"

#include "wgflow/errors.hpp"
#include "wgflow/hash.hpp"
#include "wgflow/parallel.hpp"
#include "wgflow/rng.hpp"
#include "wgflow/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace wgflow {

bool ScalarField1D::in_domain(double s) const noexcept {
    if (kind == Kind::log_regularized) return s + eps > 0.0;
    return std::isfinite(s);
}

double ScalarField1D::value(double s) const noexcept {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::identity: return s;
        case Kind::log_regularized: return scale * std::log(s + eps);
        case Kind::quadratic: return 0.5 * a * s * s;
    }
    return 0.0;
}

double ScalarField1D::d1(double s) const noexcept {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::identity: return 1.0;
        case Kind::log_regularized: return scale / (s + eps);
        case Kind::quadratic: return a * s;
    }
    return 0.0;
}

double ScalarField1D::d2(double s) const noexcept {
    switch (kind) {
        case Kind::none:
        case Kind::identity: return 0.0;
        case Kind::log_regularized: return -scale / ((s + eps) * (s + eps));
        case Kind::quadratic: return a;
    }
    return 0.0;
}

namespace {

double norm_sq(std::span<const double> x) noexcept {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return r2;
}

// Rows per parallel chunk below which threading costs more than it saves.
constexpr std::size_t kParallelRowThreshold = 512;

std::size_t row_workers(std::size_t n) {
    return n >= kParallelRowThreshold ? configured_threads() : 1;
}

struct SoABuffer {
    std::vector<double> coords;
    simd::SoAView view;

    explicit SoABuffer(const ParticleEnsemble& e) : coords(e.size() * e.dim()) {
        const std::size_t n = e.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < e.dim(); ++k) coords[k * n + i] = e.point(i)[k];
        }
        view = {coords.data(), n, e.dim(), n};
    }
};

std::vector<double> densities_at_particles(const SoABuffer& soa, double sigma) {
    const auto& kernels = simd::active_kernels();
    const std::size_t n = soa.view.count;
    std::vector<double> rho(n);
    const double weight = 1.0 / static_cast<double>(n);
    parallel_for(n, row_workers(n), [&](std::size_t begin, std::size_t end) {
        kernels.gaussian_density_rows(soa.view, sigma, weight, begin, end, rho.data());
    });
    return rho;
}

void check_density_domain(const ScalarField1D& f, const std::vector<double>& rho) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!f.in_domain(rho[i])) {
            throw EvaluationError("mollified density at particle " + std::to_string(i) +
                                      " is outside the domain of the internal-energy integrand",
                                  i);
        }
    }
}

double interaction_value(const RadialPotential& w, std::span<const double> xi, std::span<const double> xj) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double z = xi[k] - xj[k];
        r2 += z * z;
    }
    switch (w.kind) {
        case RadialPotential::Kind::none: return 0.0;
        case RadialPotential::Kind::quadratic: return 0.5 * w.a * r2;
        case RadialPotential::Kind::quadratic_paper: return r2;
        case RadialPotential::Kind::log_regularized: return w.c * std::log(w.eps * w.eps + r2);
    }
    return 0.0;
}

void add_interaction_gradient(const SoABuffer& soa, const RadialPotential& w, GradientField& out) {
    if (w.kind == RadialPotential::Kind::none) return;
    simd::RadialGradKind kind = simd::RadialGradKind::quadratic;
    double p0 = 0.0;
    double p1 = 0.0;
    switch (w.kind) {
        case RadialPotential::Kind::quadratic: p0 = w.a; break;
        case RadialPotential::Kind::quadratic_paper: p0 = 2.0; break;
        case RadialPotential::Kind::log_regularized:
            kind = simd::RadialGradKind::log_regularized;
            p0 = w.c;
            p1 = w.eps;
            break;
        case RadialPotential::Kind::none: break;
    }
    const auto& kernels = simd::active_kernels();
    const std::size_t n = soa.view.count;
    const double weight = 1.0 / static_cast<double>(n);
    double* data = out.flat().data();
    parallel_for(n, row_workers(n), [&](std::size_t begin, std::size_t end) {
        kernels.radial_gradient_rows(soa.view, kind, p0, p1, weight, begin, end, data);
    });
}

void add_internal_gradient(const SoABuffer& soa, const EnergySpec& spec, GradientField& out) {
    if (spec.internal.kind == ScalarField1D::Kind::none) return;
    const auto rho = densities_at_particles(soa, spec.sigma);
    check_density_domain(spec.internal, rho);
    std::vector<double> fp(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) fp[i] = spec.internal.d1(rho[i]);
    const auto& kernels = simd::active_kernels();
    const std::size_t n = soa.view.count;
    const double weight = 1.0 / static_cast<double>(n);
    double* data = out.flat().data();
    parallel_for(n, row_workers(n), [&](std::size_t begin, std::size_t end) {
        kernels.gaussian_force_rows(soa.view, spec.sigma, fp.data(), weight, begin, end, data);
    });
}

void add_potential_gradient(const ParticleEnsemble& e, const RadialPotential& v, GradientField& out) {
    if (v.kind == RadialPotential::Kind::none) return;
    std::vector<double> g(e.dim());
    for (std::size_t i = 0; i < e.size(); ++i) {
        v.grad(e.point(i), g);
        auto row = out.point(i);
        for (std::size_t k = 0; k < e.dim(); ++k) row[k] += g[k];
    }
}

}  // namespace

double RadialPotential::value(std::span<const double> x) const noexcept {
    const double r2 = norm_sq(x);
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::quadratic: return 0.5 * a * r2;
        case Kind::quadratic_paper: return r2;
        case Kind::log_regularized: return c * std::log(eps * eps + r2);
    }
    return 0.0;
}

void RadialPotential::grad(std::span<const double> x, std::span<double> out) const noexcept {
    double factor = 0.0;
    switch (kind) {
        case Kind::none: factor = 0.0; break;
        case Kind::quadratic: factor = a; break;
        case Kind::quadratic_paper: factor = 2.0; break;
        case Kind::log_regularized: factor = 2.0 * c / (eps * eps + norm_sq(x)); break;
    }
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = factor * x[k];
}

void EnergySpec::validate() const {
    if (internal.kind != ScalarField1D::Kind::none && !(sigma > 0.0)) {
        throw ParameterError("mollifier width sigma must be positive");
    }
    if (internal.kind == ScalarField1D::Kind::log_regularized && !(internal.eps > 0.0)) {
        throw ParameterError("log_regularized internal energy needs eps > 0");
    }
    for (const RadialPotential* p : {&potential, &interaction}) {
        if (p->kind == RadialPotential::Kind::log_regularized && !(p->eps > 0.0)) {
            throw ParameterError("log_regularized potential needs eps > 0");
        }
    }
}

double mollified_density(const ParticleEnsemble& e, double sigma, std::span<const double> x) {
    if (!(sigma > 0.0)) throw ParameterError("mollified_density: sigma must be positive");
    if (x.size() != e.dim()) throw ComparabilityError("mollified_density: point dimension mismatch");
    const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * static_cast<double>(e.dim()));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    double acc = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < e.dim(); ++k) {
            const double z = x[k] - e.point(j)[k];
            r2 += z * z;
        }
        acc += std::exp(-r2 * inv2s2);
    }
    return norm * acc / static_cast<double>(e.size());
}

double energy_value(const ParticleEnsemble& e, const EnergySpec& spec) {
    spec.validate();
    const std::size_t n = e.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;

    if (spec.internal.kind != ScalarField1D::Kind::none) {
        const SoABuffer soa(e);
        const auto rho = densities_at_particles(soa, spec.sigma);
        check_density_domain(spec.internal, rho);
        double acc = 0.0;
        for (double r : rho) acc += spec.internal.value(r);
        total += acc * inv_n;
    }
    if (spec.potential.kind != RadialPotential::Kind::none) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += spec.potential.value(e.point(i));
        total += acc * inv_n;
    }
    if (spec.interaction.kind != RadialPotential::Kind::none) {
        // Row sums are independent; rows are folded in ascending i afterwards.
        std::vector<double> rows(n);
        parallel_for(n, row_workers(n), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += interaction_value(spec.interaction, e.point(i), e.point(j));
                rows[i] = acc;
            }
        });
        double acc = 0.0;
        for (double r : rows) acc += r;
        total += 0.5 * acc * inv_n * inv_n;
    }
    return total;
}

GradientField wasserstein_gradient(const ParticleEnsemble& e, const EnergySpec& spec) {
    spec.validate();
    GradientField g(e.size(), e.dim());
    add_potential_gradient(e, spec.potential, g);
    if (spec.internal.kind != ScalarField1D::Kind::none || spec.interaction.kind != RadialPotential::Kind::none) {
        const SoABuffer soa(e);
        add_internal_gradient(soa, spec, g);
        add_interaction_gradient(soa, spec.interaction, g);
    }
    return g;
}

GradientParts wasserstein_gradient_parts(const ParticleEnsemble& e, const EnergySpec& spec) {
    spec.validate();
    GradientParts parts{GradientField(e.size(), e.dim()), GradientField(e.size(), e.dim()),
                        GradientField(e.size(), e.dim())};
    const SoABuffer soa(e);
    add_internal_gradient(soa, spec, parts.internal);
    add_potential_gradient(e, spec.potential, parts.potential);
    add_interaction_gradient(soa, spec.interaction, parts.interaction);
    return parts;
}

double field_norm(const GradientField& g) {
    const auto flat = g.flat();
    double acc = 0.0;
    for (double v : flat) acc += v * v;
    return std::sqrt(acc / static_cast<double>(g.size()));
}

double lifted_gradient_norm(const ParticleEnsemble& e, const EnergySpec& spec) {
    return field_norm(wasserstein_gradient(e, spec));
}

double default_probe_step(const ParticleEnsemble& e) { return 1e-4 * (1.0 + e.rms_radius()); }

namespace {

ParticleEnsemble shifted(const ParticleEnsemble& e, const GradientField& v, double t) {
    ParticleEnsemble out = e;
    auto dst = out.flat();
    const auto dir = v.flat();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += t * dir[k];
    return out;
}

double mean_inner(const GradientField& a, const GradientField& b) {
    const auto fa = a.flat();
    const auto fb = b.flat();
    double acc = 0.0;
    for (std::size_t k = 0; k < fa.size(); ++k) acc += fa[k] * fb[k];
    return acc / static_cast<double>(a.size());
}

}  // namespace

ProbeResult convexity_probe(const ParticleEnsemble& e, const GradientField& v, const EnergySpec& spec, double h) {
    require_comparable(e, v, "convexity_probe");
    if (!(h > 0.0)) throw ParameterError("convexity_probe: step h must be positive");
    ProbeResult result;
    result.first = mean_inner(wasserstein_gradient(e, spec), v);
    const double center = energy_value(e, spec);
    const double forward = energy_value(shifted(e, v, h), spec);
    const double backward = energy_value(shifted(e, v, -h), spec);
    result.second = (forward - 2.0 * center + backward) / (h * h);
    return result;
}

namespace {

struct SampleRatios {
    double monotonicity;  // <g1 - g2, x1 - x2> / |x1 - x2|^2
    double lipschitz;     // |g1 - g2| / |x1 - x2|
};

template <typename Reduce>
double sample_ratios(const EnergySpec& spec, const ParticleEnsemble& base, int samples, double radius,
                     std::uint64_t seed, Reduce&& reduce) {
    if (samples < 1) throw ParameterError("sample count must be at least 1");
    if (!(radius > 0.0)) throw ParameterError("sampling radius must be positive");
    const std::size_t len = base.flat().size();
    std::uint64_t draw = 0;
    bool have = false;
    double acc = 0.0;

    auto perturbed = [&](std::uint64_t stream) {
        const CounterRng rng(seed, stream);
        ParticleEnsemble p = base;
        auto flat = p.flat();
        for (std::size_t k = 0; k < len; ++k) flat[k] += radius * rng.normal(k);
        return p;
    };

    for (int s = 0; s < samples; ++s) {
        int degenerate = 0;
        for (;;) {
            const ParticleEnsemble x1 = perturbed(2 * draw);
            const ParticleEnsemble x2 = perturbed(2 * draw + 1);
            ++draw;
            const auto f1 = x1.flat();
            const auto f2 = x2.flat();
            double dx2 = 0.0;
            for (std::size_t k = 0; k < len; ++k) dx2 += (f1[k] - f2[k]) * (f1[k] - f2[k]);
            if (dx2 == 0.0) {
                if (++degenerate >= 100) {
                    throw SamplingError("100 consecutive degenerate perturbation pairs; radius too small");
                }
                continue;
            }
            const GradientField g1 = wasserstein_gradient(x1, spec);
            const GradientField g2 = wasserstein_gradient(x2, spec);
            const auto h1 = g1.flat();
            const auto h2 = g2.flat();
            double inner = 0.0;
            double dg2 = 0.0;
            for (std::size_t k = 0; k < len; ++k) {
                const double dg = h1[k] - h2[k];
                inner += dg * (f1[k] - f2[k]);
                dg2 += dg * dg;
            }
            // The 1/N weights of the L2(rho0) products cancel in both ratios.
            const SampleRatios r{inner / dx2, std::sqrt(dg2 / dx2)};
            acc = have ? reduce(acc, r) : reduce(r);
            have = true;
            break;
        }
    }
    return acc;
}

}  // namespace

double estimate_lambda(const EnergySpec& spec, const ParticleEnsemble& base, int samples, double radius,
                       std::uint64_t seed) {
    struct MinMono {
        double operator()(const SampleRatios& r) const { return r.monotonicity; }
        double operator()(double acc, const SampleRatios& r) const { return std::min(acc, r.monotonicity); }
    };
    return sample_ratios(spec, base, samples, radius, seed, MinMono{});
}

double estimate_lipschitz(const EnergySpec& spec, const ParticleEnsemble& base, int samples, double radius,
                          std::uint64_t seed) {
    struct MaxLip {
        double operator()(const SampleRatios& r) const { return r.lipschitz; }
        double operator()(double acc, const SampleRatios& r) const { return std::max(acc, r.lipschitz); }
    };
    return sample_ratios(spec, base, samples, radius, seed, MaxLip{});
}

std::string to_string(ScalarField1D::Kind kind) {
    switch (kind) {
        case ScalarField1D::Kind::none: return "none";
        case ScalarField1D::Kind::identity: return "identity";
        case ScalarField1D::Kind::log_regularized: return "log_regularized";
        case ScalarField1D::Kind::quadratic: return "quadratic";
    }
    return "none";
}

std::string to_string(RadialPotential::Kind kind) {
    switch (kind) {
        case RadialPotential::Kind::none: return "none";
        case RadialPotential::Kind::quadratic: return "quadratic";
        case RadialPotential::Kind::quadratic_paper: return "quadratic_paper";
        case RadialPotential::Kind::log_regularized: return "log_regularized";
    }
    return "none";
}

std::string canonical_string(const EnergySpec& spec) {
    std::string s;
    s += "f=" + to_string(spec.internal.kind);
    s += ";f.scale=" + format_double(spec.internal.scale);
    s += ";f.eps=" + format_double(spec.internal.eps);
    s += ";f.a=" + format_double(spec.internal.a);
    s += ";sigma=" + format_double(spec.sigma);
    for (const auto& [tag, p] : {std::pair{"V", &spec.potential}, std::pair{"W", &spec.interaction}}) {
        s += std::string(";") + tag + "=" + to_string(p->kind);
        s += std::string(";") + tag + ".a=" + format_double(p->a);
        s += std::string(";") + tag + ".c=" + format_double(p->c);
        s += std::string(";") + tag + ".eps=" + format_double(p->eps);
    }
    return s;
}

std::string spec_digest(const EnergySpec& spec) {
    Fnv1a h;
    h.update(canonical_string(spec));
    return h.hex();
}

}  // namespace wgflow
