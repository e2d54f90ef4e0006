#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wgflow {

/// N equally weighted particles in R^d. Positions are stored row-major
/// (particle-major), and the particle index is the Lagrangian label: no
/// operation in the library reorders particles.
class ParticleEnsemble {
public:
    ParticleEnsemble() = default;

    /// Zero-initialised ensemble of `count` particles in dimension `dim`.
    ParticleEnsemble(std::size_t count, std::size_t dim);

    /// Takes ownership of `positions` (size count*dim). Throws ParameterError
    /// on a size mismatch, a zero count/dimension, or a non-finite coordinate.
    ParticleEnsemble(std::size_t dim, std::vector<double> positions);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : positions_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> point(std::size_t i) const { return {positions_.data() + i * dim_, dim_}; }
    std::span<double> point(std::size_t i) { return {positions_.data() + i * dim_, dim_}; }

    std::span<const double> flat() const noexcept { return positions_; }
    std::span<double> flat() noexcept { return positions_; }

    bool all_finite() const noexcept;
    bool comparable(const ParticleEnsemble& other) const noexcept {
        return dim_ == other.dim_ && size() == other.size();
    }

    /// Root-mean-square distance of the particles from the origin.
    double rms_radius() const noexcept;

    friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> positions_;
};

/// Throws ComparabilityError unless a and b share N and d.
void require_comparable(const ParticleEnsemble& a, const ParticleEnsemble& b, const char* context);

/// Per-particle vectors aligned with an ensemble (same N, d), e.g. the
/// Wasserstein gradient or a probe direction.
using GradientField = ParticleEnsemble;

/// Snapshot CSV: header `particle_index,x0,...,x{d-1}`, index ascending,
/// 17 significant digits.
void write_snapshot_csv(std::ostream& out, const ParticleEnsemble& e);
void write_snapshot_csv(const std::string& path, const ParticleEnsemble& e);
ParticleEnsemble read_snapshot_csv(std::istream& in);
ParticleEnsemble read_snapshot_csv(const std::string& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace wgflow
