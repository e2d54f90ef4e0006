#pragma once

#include "wgflow/energy.hpp"
#include "wgflow/ensemble.hpp"
#include "wgflow/rational.hpp"
#include "wgflow/steppers.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wgflow {

inline constexpr const char* kToolVersion = "0.1.0";

/// Initial empirical measure. Particle i draws its coordinates from the
/// counter-based generator stream i, so positions do not depend on the count.
struct InitSpec {
    enum class Kind { gaussian_blob, two_blobs, ring, file };

    Kind kind = Kind::gaussian_blob;
    std::vector<double> center;  // gaussian_blob; a single value is broadcast
    std::vector<double> c1;      // two_blobs: even indices
    std::vector<double> c2;      // two_blobs: odd indices
    double std = 0.0;
    double radius = 1.0;  // ring, in the first two coordinates
    std::string path;     // file: snapshot CSV, relative paths resolve against base_dir
};

std::string to_string(InitSpec::Kind kind);

/// A step size or final time as written in the config: exact when given as
/// a "p/q" string, otherwise the plain number.
struct TimeValue {
    double value = 0.0;
    std::optional<Rational> exact;

    static TimeValue of(double v) { return {v, std::nullopt}; }
    static TimeValue of(const Rational& r) { return {r.to_double(), r}; }
};

struct RunConfig {
    std::size_t dimension = 2;
    std::size_t count = 64;
    InitSpec init;
    std::uint64_t seed = 0;
    EnergySpec energy;

    SchemeKind scheme = SchemeKind::trapezoid;
    TimeValue tau = TimeValue::of(0.1);
    TimeValue t_final = TimeValue::of(1.0);
    InnerSolverConfig inner;

    std::optional<double> lambda;
    std::optional<double> lipschitz;

    std::size_t save_every = 1;
    std::string out_dir = "out";

    /// Directory used to resolve a relative init file path.
    std::string base_dir;

    SchemeConfig scheme_config() const;
};

/// Parses a run config document. Throws ConfigError naming the offending key.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// Canonical document: every field explicit, fixed key order. parse of the
/// result reproduces the same config.
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const EnergySpec& spec);
EnergySpec parse_energy(const nlohmann::json& doc);

ParticleEnsemble generate_initial(const InitSpec& init, std::size_t count, std::size_t dim, std::uint64_t seed,
                                  const std::string& base_dir = "");
ParticleEnsemble generate_initial(const RunConfig& cfg);

/// FNV-1a digest of the raw coordinates.
std::string ensemble_digest(const ParticleEnsemble& e);

struct RunManifest {
    nlohmann::json config;
    std::string spec_digest;
    std::string initial_digest;
    double wall_seconds = 0.0;
    std::optional<double> descent_rate;
    std::string inner_kind;
    double inner_tol = 0.0;
    int inner_max_iters = 0;
    bool complete = true;
    std::string failure;
    std::string simd;

    nlohmann::json to_json() const;
};

}  // namespace wgflow
