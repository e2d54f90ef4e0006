#include "wgflow/config.hpp"

#include "wgflow/errors.hpp"
#include "wgflow/hash.hpp"
#include "wgflow/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace wgflow {

using nlohmann::json;

std::string to_string(InitSpec::Kind kind) {
    switch (kind) {
        case InitSpec::Kind::gaussian_blob: return "gaussian_blob";
        case InitSpec::Kind::two_blobs: return "two_blobs";
        case InitSpec::Kind::ring: return "ring";
        case InitSpec::Kind::file: return "file";
    }
    return "unknown";
}

SchemeConfig RunConfig::scheme_config() const {
    SchemeConfig c;
    c.scheme = scheme;
    c.tau = tau.value;
    c.t_final = t_final.value;
    c.inner = inner;
    c.declared_lambda = lambda;
    c.declared_lipschitz = lipschitz;
    return c;
}

namespace {

const json& require(const json& doc, const char* key, const std::string& where) {
    if (!doc.is_object() || !doc.contains(key)) throw ConfigError("missing key '" + where + key + "'");
    return doc.at(key);
}

double number(const json& v, const std::string& name) {
    if (!v.is_number()) throw ConfigError("'" + name + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("'" + name + "' must be finite");
    return d;
}

double number_or(const json& doc, const char* key, double fallback, const std::string& where) {
    if (!doc.contains(key)) return fallback;
    return number(doc.at(key), where + key);
}

std::size_t count_value(const json& v, const std::string& name) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("'" + name + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::string kind_of(const json& doc, const std::string& where) {
    const json& k = require(doc, "kind", where);
    if (!k.is_string()) throw ConfigError("'" + where + "kind' must be a string");
    return k.get<std::string>();
}

TimeValue time_value(const json& v, const std::string& name) {
    if (v.is_string()) return TimeValue::of(Rational::parse(v.get<std::string>()));
    return TimeValue::of(number(v, name));
}

json time_json(const TimeValue& t) {
    if (t.exact) return t.exact->to_string();
    return t.value;
}

std::vector<double> vector_value(const json& v, const std::string& name) {
    if (v.is_number()) return {number(v, name)};
    if (!v.is_array()) throw ConfigError("'" + name + "' must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number(e, name));
    return out;
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t dim, const std::string& name) {
    if (v.size() == 1) return std::vector<double>(dim, v[0]);
    if (v.size() != dim) {
        throw ConfigError("'" + name + "' has " + std::to_string(v.size()) + " components, dimension is " +
                          std::to_string(dim));
    }
    return v;
}

ScalarField1D parse_f(const json& doc) {
    const std::string kind = kind_of(doc, "energy.internal.f.");
    if (kind == "none") return ScalarField1D::none();
    if (kind == "identity") return ScalarField1D::identity();
    if (kind == "log_regularized") {
        return ScalarField1D::log_regularized(number(require(doc, "scale", "energy.internal.f."), "scale"),
                                              number(require(doc, "eps", "energy.internal.f."), "eps"));
    }
    if (kind == "quadratic") return ScalarField1D::quadratic(number(require(doc, "a", "energy.internal.f."), "a"));
    throw ConfigError("unknown internal energy kind '" + kind + "'");
}

RadialPotential parse_potential(const json& doc, const std::string& where) {
    const std::string kind = kind_of(doc, where);
    if (kind == "none") return RadialPotential::none();
    if (kind == "quadratic") return RadialPotential::quadratic(number(require(doc, "a", where), where + "a"));
    if (kind == "quadratic_paper") return RadialPotential::quadratic_paper();
    if (kind == "log_regularized") {
        return RadialPotential::log_regularized(number(require(doc, "c", where), where + "c"),
                                                number(require(doc, "eps", where), where + "eps"));
    }
    throw ConfigError("unknown potential kind '" + kind + "' at '" + where + "'");
}

json f_json(const ScalarField1D& f) {
    json j = {{"kind", to_string(f.kind)}};
    if (f.kind == ScalarField1D::Kind::log_regularized) {
        j["scale"] = f.scale;
        j["eps"] = f.eps;
    } else if (f.kind == ScalarField1D::Kind::quadratic) {
        j["a"] = f.a;
    }
    return j;
}

json potential_json(const RadialPotential& p) {
    json j = {{"kind", to_string(p.kind)}};
    if (p.kind == RadialPotential::Kind::quadratic) {
        j["a"] = p.a;
    } else if (p.kind == RadialPotential::Kind::log_regularized) {
        j["c"] = p.c;
        j["eps"] = p.eps;
    }
    return j;
}

InitSpec parse_init(const json& doc, std::size_t dim) {
    InitSpec init;
    const std::string kind = kind_of(doc, "particles.init.");
    const std::string w = "particles.init.";
    if (kind == "gaussian_blob") {
        init.kind = InitSpec::Kind::gaussian_blob;
        init.center = broadcast(doc.contains("center") ? vector_value(doc.at("center"), w + "center")
                                                       : std::vector<double>{0.0},
                                dim, w + "center");
        init.std = number_or(doc, "std", 0.0, w);
    } else if (kind == "two_blobs") {
        init.kind = InitSpec::Kind::two_blobs;
        init.c1 = broadcast(vector_value(require(doc, "c1", w), w + "c1"), dim, w + "c1");
        init.c2 = broadcast(vector_value(require(doc, "c2", w), w + "c2"), dim, w + "c2");
        init.std = number_or(doc, "std", 0.0, w);
    } else if (kind == "ring") {
        init.kind = InitSpec::Kind::ring;
        init.radius = number(require(doc, "radius", w), w + "radius");
        init.std = number_or(doc, "std", 0.0, w);
    } else if (kind == "file") {
        init.kind = InitSpec::Kind::file;
        const json& p = require(doc, "path", w);
        if (!p.is_string()) throw ConfigError("'particles.init.path' must be a string");
        init.path = p.get<std::string>();
    } else {
        throw ConfigError("unknown init kind '" + kind + "'");
    }
    if (init.std < 0.0) throw ConfigError("'particles.init.std' must be nonnegative");
    return init;
}

json init_json(const InitSpec& init) {
    json j = {{"kind", to_string(init.kind)}};
    switch (init.kind) {
        case InitSpec::Kind::gaussian_blob:
            j["center"] = init.center;
            j["std"] = init.std;
            break;
        case InitSpec::Kind::two_blobs:
            j["c1"] = init.c1;
            j["c2"] = init.c2;
            j["std"] = init.std;
            break;
        case InitSpec::Kind::ring:
            j["radius"] = init.radius;
            j["std"] = init.std;
            break;
        case InitSpec::Kind::file: j["path"] = init.path; break;
    }
    return j;
}

std::optional<double> optional_number(const json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    return number(doc.at(key), key);
}

}  // namespace

EnergySpec parse_energy(const json& doc) {
    EnergySpec spec;
    if (doc.contains("internal")) {
        const json& internal = doc.at("internal");
        if (internal.contains("f")) spec.internal = parse_f(internal.at("f"));
        spec.sigma = number_or(internal, "sigma", 1.0, "energy.internal.");
    }
    if (doc.contains("potential")) spec.potential = parse_potential(doc.at("potential"), "energy.potential.");
    if (doc.contains("interaction")) spec.interaction = parse_potential(doc.at("interaction"), "energy.interaction.");
    try {
        spec.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("energy: ") + e.what());
    }
    return spec;
}

json to_json(const EnergySpec& spec) {
    return {{"internal", {{"f", f_json(spec.internal)}, {"sigma", spec.sigma}}},
            {"potential", potential_json(spec.potential)},
            {"interaction", potential_json(spec.interaction)}};
}

RunConfig parse_run_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    cfg.dimension = count_value(require(doc, "dimension", ""), "dimension");
    if (cfg.dimension == 0) throw ConfigError("'dimension' must be at least 1");

    const json& particles = require(doc, "particles", "");
    cfg.count = count_value(require(particles, "count", "particles."), "particles.count");
    if (cfg.count == 0) throw ConfigError("'particles.count' must be at least 1");
    cfg.init = parse_init(require(particles, "init", "particles."), cfg.dimension);
    if (particles.contains("seed")) {
        const json& s = particles.at("seed");
        if (!s.is_number_integer()) throw ConfigError("'particles.seed' must be an integer");
        cfg.seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
    }

    cfg.energy = parse_energy(require(doc, "energy", ""));

    const json& scheme = require(doc, "scheme", "");
    cfg.scheme = parse_scheme_kind(kind_of(scheme, "scheme."));
    cfg.tau = time_value(require(scheme, "tau", "scheme."), "scheme.tau");
    cfg.t_final = time_value(require(scheme, "t_final", "scheme."), "scheme.t_final");
    if (scheme.contains("inner")) {
        const json& inner = scheme.at("inner");
        if (inner.contains("kind")) cfg.inner.kind = parse_inner_kind(kind_of(inner, "scheme.inner."));
        cfg.inner.tol = number_or(inner, "tol", cfg.inner.tol, "scheme.inner.");
        if (inner.contains("max_iters")) {
            cfg.inner.max_iters = static_cast<int>(count_value(inner.at("max_iters"), "scheme.inner.max_iters"));
        }
        if (inner.contains("descent_rate")) {
            const json& r = inner.at("descent_rate");
            if (r.is_string()) {
                if (r.get<std::string>() != "auto") throw ConfigError("'scheme.inner.descent_rate' must be a number or \"auto\"");
            } else if (!r.is_null()) {
                cfg.inner.descent_rate = number(r, "scheme.inner.descent_rate");
            }
        }
    }

    cfg.lambda = optional_number(doc, "lambda");
    cfg.lipschitz = optional_number(doc, "L");

    if (doc.contains("output")) {
        const json& output = doc.at("output");
        if (output.contains("save_every")) cfg.save_every = count_value(output.at("save_every"), "output.save_every");
        if (output.contains("out_dir")) {
            if (!output.at("out_dir").is_string()) throw ConfigError("'output.out_dir' must be a string");
            cfg.out_dir = output.at("out_dir").get<std::string>();
        }
    }
    if (cfg.save_every == 0) throw ConfigError("'output.save_every' must be at least 1");

    try {
        cfg.scheme_config().validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("scheme: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    RunConfig cfg = parse_run_config(doc);
    cfg.base_dir = std::filesystem::path(path).parent_path().string();
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json inner = {{"kind", to_string(cfg.inner.kind)}, {"tol", cfg.inner.tol}, {"max_iters", cfg.inner.max_iters}};
    if (cfg.inner.descent_rate) {
        inner["descent_rate"] = *cfg.inner.descent_rate;
    } else {
        inner["descent_rate"] = "auto";
    }
    json doc = {
        {"dimension", cfg.dimension},
        {"particles", {{"count", cfg.count}, {"init", init_json(cfg.init)}, {"seed", cfg.seed}}},
        {"energy", to_json(cfg.energy)},
        {"scheme",
         {{"kind", to_string(cfg.scheme)},
          {"tau", time_json(cfg.tau)},
          {"t_final", time_json(cfg.t_final)},
          {"inner", inner}}},
        {"output", {{"save_every", cfg.save_every}, {"out_dir", cfg.out_dir}}},
    };
    doc["lambda"] = cfg.lambda ? json(*cfg.lambda) : json(nullptr);
    doc["L"] = cfg.lipschitz ? json(*cfg.lipschitz) : json(nullptr);
    return doc;
}

ParticleEnsemble generate_initial(const InitSpec& init, std::size_t count, std::size_t dim, std::uint64_t seed,
                                  const std::string& base_dir) {
    if (count == 0 || dim == 0) throw ConfigError("initial ensemble needs a positive count and dimension");
    if (init.kind == InitSpec::Kind::file) {
        std::filesystem::path p(init.path);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        ParticleEnsemble e = read_snapshot_csv(p.string());
        if (e.dim() != dim || e.size() != count) {
            throw ConfigError("init file '" + p.string() + "' holds " + std::to_string(e.size()) + " particles in d=" +
                              std::to_string(e.dim()) + ", config expects " + std::to_string(count) + " in d=" +
                              std::to_string(dim));
        }
        return e;
    }
    auto sized = [&](const std::vector<double>& v, const char* name) {
        if (v.size() == 1) return std::vector<double>(dim, v[0]);
        if (v.size() != dim) throw ConfigError(std::string("init ") + name + " does not match the dimension");
        return v;
    };
    std::vector<double> pos(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
        const CounterRng rng(seed, i);
        double* x = pos.data() + i * dim;
        switch (init.kind) {
            case InitSpec::Kind::gaussian_blob: {
                const auto c = sized(init.center.empty() ? std::vector<double>{0.0} : init.center, "center");
                for (std::size_t k = 0; k < dim; ++k) x[k] = c[k] + init.std * rng.normal(k);
                break;
            }
            case InitSpec::Kind::two_blobs: {
                const auto c = sized(i % 2 == 0 ? init.c1 : init.c2, i % 2 == 0 ? "c1" : "c2");
                for (std::size_t k = 0; k < dim; ++k) x[k] = c[k] + init.std * rng.normal(k);
                break;
            }
            case InitSpec::Kind::ring: {
                // Uniforms come from a separate stream so normals keep their indices.
                const CounterRng angle_rng(seed ^ 0x5bd1e995u, i);
                const double u = angle_rng.uniform(0);
                if (dim == 1) {
                    x[0] = (u < 0.5 ? -init.radius : init.radius) + init.std * rng.normal(0);
                } else {
                    const double theta = 2.0 * std::numbers::pi * u;
                    x[0] = init.radius * std::cos(theta) + init.std * rng.normal(0);
                    x[1] = init.radius * std::sin(theta) + init.std * rng.normal(1);
                    for (std::size_t k = 2; k < dim; ++k) x[k] = init.std * rng.normal(k);
                }
                break;
            }
            case InitSpec::Kind::file: break;
        }
    }
    return ParticleEnsemble(dim, std::move(pos));
}

ParticleEnsemble generate_initial(const RunConfig& cfg) {
    return generate_initial(cfg.init, cfg.count, cfg.dimension, cfg.seed, cfg.base_dir);
}

std::string ensemble_digest(const ParticleEnsemble& e) {
    Fnv1a h;
    const std::uint64_t shape[2] = {e.size(), e.dim()};
    h.update(std::string_view(reinterpret_cast<const char*>(shape), sizeof shape));
    h.update(e.flat());
    return h.hex();
}

json RunManifest::to_json() const {
    json j = {{"tool", "wgflow"},
              {"version", kToolVersion},
              {"config", config},
              {"spec_digest", spec_digest},
              {"initial_digest", initial_digest},
              {"wall_seconds", wall_seconds},
              {"inner_solver", {{"kind", inner_kind}, {"tol", inner_tol}, {"max_iters", inner_max_iters}}},
              {"complete", complete},
              {"simd", simd}};
    j["inner_solver"]["descent_rate"] = descent_rate ? json(*descent_rate) : json(nullptr);
    if (!failure.empty()) j["failure"] = failure;
    return j;
}

}  // namespace wgflow
