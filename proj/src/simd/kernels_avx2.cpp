// AVX2 + FMA variants of the pair-loop kernels. Compiled with -mavx2 -mfma;
// only reached after dispatch.cpp has confirmed CPU support.

#include "wgflow/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <numbers>
#include <vector>

// std::vector<__m256d> drops the vector_size attribute from the template
// argument; the type is still 32-byte aligned through aligned new.
#pragma GCC diagnostic ignored "-Wignored-attributes"

namespace wgflow::simd {
namespace {

double hsum_ordered(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
}

// exp(x) for x <= 0. Cody-Waite reduction to |r| <= ln2/2 and a degree-13
// Taylor polynomial; relative error is a few ulp. Inputs below -708 return 0.
__m256d exp_nonpositive(__m256d x) {
    const __m256d lower = _mm256_set1_pd(-708.0);
    const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
    x = _mm256_max_pd(x, lower);

    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    static constexpr double inv_fact[14] = {
        1.0,
        1.0,
        1.0 / 2.0,
        1.0 / 6.0,
        1.0 / 24.0,
        1.0 / 120.0,
        1.0 / 720.0,
        1.0 / 5040.0,
        1.0 / 40320.0,
        1.0 / 362880.0,
        1.0 / 3628800.0,
        1.0 / 39916800.0,
        1.0 / 479001600.0,
        1.0 / 6227020800.0,
    };
    __m256d p = _mm256_set1_pd(inv_fact[13]);
    for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[k]));

    const __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i bits = _mm256_cvtepi32_epi64(n32);
    bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, result);
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    double total = hsum_ordered(acc);
    for (; k < n; ++k) {
        const double diff = a[k] - b[k];
        total += diff * diff;
    }
    return total;
}

void axpy2_avx2(const double* x, const double* g1, const double* g2, double scale, double* out,
                std::size_t n) {
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t k = 0;
    if (g2 == nullptr) {
        for (; k + 4 <= n; k += 4) {
            const __m256d step = _mm256_mul_pd(s, _mm256_loadu_pd(g1 + k));
            _mm256_storeu_pd(out + k, _mm256_sub_pd(_mm256_loadu_pd(x + k), step));
        }
        for (; k < n; ++k) out[k] = x[k] - scale * g1[k];
        return;
    }
    for (; k + 4 <= n; k += 4) {
        const __m256d sum = _mm256_add_pd(_mm256_loadu_pd(g1 + k), _mm256_loadu_pd(g2 + k));
        _mm256_storeu_pd(out + k, _mm256_sub_pd(_mm256_loadu_pd(x + k), _mm256_mul_pd(s, sum)));
    }
    for (; k < n; ++k) out[k] = x[k] - scale * (g1[k] + g2[k]);
}

// Squared distance from particle i to the four particles starting at j.
__m256d block_r2(const SoAView& x, std::size_t i, std::size_t j) {
    __m256d r2 = _mm256_setzero_pd();
    for (std::size_t k = 0; k < x.dim; ++k) {
        const double* row = x.coords + k * x.stride;
        const __m256d z = _mm256_sub_pd(_mm256_set1_pd(row[i]), _mm256_loadu_pd(row + j));
        r2 = _mm256_add_pd(r2, _mm256_mul_pd(z, z));
    }
    return r2;
}

double scalar_r2(const SoAView& x, std::size_t i, std::size_t j) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.dim; ++k) {
        const double zk = x.coords[k * x.stride + i] - x.coords[k * x.stride + j];
        r2 += zk * zk;
    }
    return r2;
}

void radial_gradient_rows_avx2(const SoAView& x, RadialGradKind kind, double p0, double p1,
                               double weight, std::size_t begin, std::size_t end, double* out) {
    const std::size_t dim = x.dim;
    const double eps2 = p1 * p1;
    const __m256d vp0 = _mm256_set1_pd(p0);
    const __m256d vtwo_p0 = _mm256_set1_pd(2.0 * p0);
    const __m256d veps2 = _mm256_set1_pd(eps2);
    std::vector<__m256d> acc(dim);
    std::vector<double> tail(dim);
    for (std::size_t i = begin; i < end; ++i) {
        for (auto& a : acc) a = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= x.count; j += 4) {
            __m256d factor = vp0;
            if (kind == RadialGradKind::log_regularized) {
                factor = _mm256_div_pd(vtwo_p0, _mm256_add_pd(veps2, block_r2(x, i, j)));
            }
            for (std::size_t k = 0; k < dim; ++k) {
                const double* row = x.coords + k * x.stride;
                const __m256d z = _mm256_sub_pd(_mm256_set1_pd(row[i]), _mm256_loadu_pd(row + j));
                acc[k] = _mm256_add_pd(acc[k], _mm256_mul_pd(factor, z));
            }
        }
        for (std::size_t k = 0; k < dim; ++k) tail[k] = hsum_ordered(acc[k]);
        for (; j < x.count; ++j) {
            const double factor =
                kind == RadialGradKind::quadratic ? p0 : 2.0 * p0 / (eps2 + scalar_r2(x, i, j));
            for (std::size_t k = 0; k < dim; ++k) {
                tail[k] += factor * (x.coords[k * x.stride + i] - x.coords[k * x.stride + j]);
            }
        }
        for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] += weight * tail[k];
    }
}

double gaussian_norm(double sigma, std::size_t dim) {
    return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * static_cast<double>(dim));
}

void gaussian_density_rows_avx2(const SoAView& x, double sigma, double weight, std::size_t begin,
                                std::size_t end, double* rho) {
    const double norm = gaussian_norm(sigma, x.dim);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const __m256d vneg = _mm256_set1_pd(-inv2s2);
    for (std::size_t i = begin; i < end; ++i) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= x.count; j += 4) {
            acc = _mm256_add_pd(acc, exp_nonpositive(_mm256_mul_pd(block_r2(x, i, j), vneg)));
        }
        double total = hsum_ordered(acc);
        for (; j < x.count; ++j) total += std::exp(-scalar_r2(x, i, j) * inv2s2);
        rho[i] = weight * norm * total;
    }
}

void gaussian_force_rows_avx2(const SoAView& x, double sigma, const double* fp, double weight,
                              std::size_t begin, std::size_t end, double* out) {
    const std::size_t dim = x.dim;
    const double norm = gaussian_norm(sigma, dim);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double inv_s2 = 1.0 / (sigma * sigma);
    const __m256d vneg = _mm256_set1_pd(-inv2s2);
    std::vector<__m256d> acc(dim);
    std::vector<double> tail(dim);
    for (std::size_t i = begin; i < end; ++i) {
        for (auto& a : acc) a = _mm256_setzero_pd();
        const __m256d fpi = _mm256_set1_pd(fp[i]);
        std::size_t j = 0;
        for (; j + 4 <= x.count; j += 4) {
            const __m256d kernel = exp_nonpositive(_mm256_mul_pd(block_r2(x, i, j), vneg));
            const __m256d factor = _mm256_mul_pd(_mm256_add_pd(fpi, _mm256_loadu_pd(fp + j)), kernel);
            for (std::size_t k = 0; k < dim; ++k) {
                const double* row = x.coords + k * x.stride;
                const __m256d z = _mm256_sub_pd(_mm256_set1_pd(row[i]), _mm256_loadu_pd(row + j));
                acc[k] = _mm256_add_pd(acc[k], _mm256_mul_pd(factor, z));
            }
        }
        for (std::size_t k = 0; k < dim; ++k) tail[k] = hsum_ordered(acc[k]);
        for (; j < x.count; ++j) {
            const double factor = (fp[i] + fp[j]) * std::exp(-scalar_r2(x, i, j) * inv2s2);
            for (std::size_t k = 0; k < dim; ++k) {
                tail[k] += factor * (x.coords[k * x.stride + i] - x.coords[k * x.stride + j]);
            }
        }
        const double row_scale = -weight * norm * inv_s2;
        for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] += row_scale * tail[k];
    }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
    static const KernelTable table{
        "avx2",
        &sum_sq_diff_avx2,
        &axpy2_avx2,
        &radial_gradient_rows_avx2,
        &gaussian_density_rows_avx2,
        &gaussian_force_rows_avx2,
    };
    return table;
}

}  // namespace wgflow::simd
