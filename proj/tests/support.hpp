#pragma once

#include "wgflow/ensemble.hpp"
#include "wgflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace testsupport {

inline wgflow::ParticleEnsemble random_ensemble(std::size_t n, std::size_t d, std::uint64_t seed,
                                                std::uint64_t stream = 0, double scale = 1.0) {
    const wgflow::CounterRng rng(seed, stream);
    std::vector<double> pos(n * d);
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = scale * rng.normal(i);
    return wgflow::ParticleEnsemble(d, std::move(pos));
}

inline wgflow::ParticleEnsemble line(std::vector<double> xs) {
    return wgflow::ParticleEnsemble(1, std::move(xs));
}

/// Minimum over all permutations of sqrt((1/N) sum |a_i - b_perm(i)|^2).
inline double brute_force_w2(const wgflow::ParticleEnsemble& a, const wgflow::ParticleEnsemble& b) {
    const std::size_t n = a.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < a.dim(); ++k) {
                const double diff = a.point(i)[k] - b.point(perm[i])[k];
                total += diff * diff;
            }
        }
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(n));
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace testsupport
