#pragma once

// Data-parallel inner loops of the particle solver. Every kernel has a
// scalar reference implementation and, where the target supports it, an
// AVX2 variant; the variant is chosen once at runtime and the two are
// equivalence-tested against each other.
//
// Summation order: the scalar kernels reduce over j in ascending order.
// The AVX2 kernels keep four lane-wise partial sums in ascending j order,
// fold them lane 0..3, then add the scalar tail. Results for a fixed
// variant are bit-reproducible; the two variants agree to rounding.

#include <cstddef>
#include <string_view>

namespace wgflow::simd {

/// Structure-of-arrays view of particle coordinates: coords[k * stride + j]
/// is coordinate k of particle j.
struct SoAView {
    const double* coords = nullptr;
    std::size_t count = 0;
    std::size_t dim = 0;
    std::size_t stride = 0;
};

/// Radial kernels whose gradient is a rational function of the offset.
enum class RadialGradKind { quadratic, log_regularized };

struct KernelTable {
    std::string_view name;

    /// sum_k (a[k] - b[k])^2
    double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);

    /// out[k] = x[k] - scale * (g1[k] + g2[k])   (g2 may be null)
    void (*axpy2)(const double* x, const double* g1, const double* g2, double scale, double* out,
                  std::size_t n);

    /// For rows i in [begin, end): out[i*dim + k] += weight * sum_j gradW(X_i - X_j)_k.
    /// quadratic: gradW(z) = p0 * z.  log_regularized: gradW(z) = 2 p0 z / (p1^2 + |z|^2).
    void (*radial_gradient_rows)(const SoAView& x, RadialGradKind kind, double p0, double p1,
                                 double weight, std::size_t begin, std::size_t end, double* out);

    /// rho[i] = weight * sum_j chi_sigma(X_i - X_j) for rows in [begin, end), where
    /// chi_sigma is the isotropic Gaussian density with standard deviation sigma.
    void (*gaussian_density_rows)(const SoAView& x, double sigma, double weight, std::size_t begin,
                                  std::size_t end, double* rho);

    /// out[i*dim + k] += weight * sum_j (fp[i] + fp[j]) * grad chi_sigma(X_i - X_j)_k
    void (*gaussian_force_rows)(const SoAView& x, double sigma, const double* fp, double weight,
                                std::size_t begin, std::size_t end, double* out);
};

const KernelTable& scalar_kernels();

/// AVX2 table, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* avx2_kernels();

/// The table used by the library. Picks AVX2 when available unless the
/// environment variable WGFLOW_SIMD is set to `scalar`.
const KernelTable& active_kernels();

/// Forces a specific table (tests/benchmarks); pass nullptr to restore the
/// automatic choice.
void override_kernels(const KernelTable* table);

}  // namespace wgflow::simd
