#pragma once

#include "wgflow/ensemble.hpp"

#include <cstddef>
#include <vector>

namespace wgflow {

/// Default size limit for exact_w2; the assignment solve is cubic in N.
inline constexpr std::size_t kDefaultW2Cap = 512;

/// sqrt((1/N) sum_i |a_i - b_i|^2): the L2(rho0) distance of two maps
/// evaluated on the same reference atoms. Upper-bounds W2 of the pushforwards.
double l2_reference_distance(const ParticleEnsemble& a, const ParticleEnsemble& b);

/// Optimal assignment for a square cost matrix (row-major, n x n).
/// Returns assignment[row] = column minimising the total cost.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

/// Exact W2 between two equal-weight empirical measures of the same size,
/// via optimal assignment on the squared Euclidean cost.
double exact_w2(const ParticleEnsemble& a, const ParticleEnsemble& b, std::size_t cap = kDefaultW2Cap);

/// Bound on W2 after pushing both measures forward by an l-Lipschitz map.
double lipschitz_pushforward_bound(double l, const ParticleEnsemble& a, const ParticleEnsemble& b,
                                   std::size_t cap = kDefaultW2Cap);

}  // namespace wgflow
