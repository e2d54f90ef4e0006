#include "wgflow/simd/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace wgflow::simd {
namespace {

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
    }
    return acc;
}

void axpy2_scalar(const double* x, const double* g1, const double* g2, double scale, double* out,
                  std::size_t n) {
    if (g2 == nullptr) {
        for (std::size_t k = 0; k < n; ++k) out[k] = x[k] - scale * g1[k];
        return;
    }
    for (std::size_t k = 0; k < n; ++k) out[k] = x[k] - scale * (g1[k] + g2[k]);
}

void radial_gradient_rows_scalar(const SoAView& x, RadialGradKind kind, double p0, double p1,
                                 double weight, std::size_t begin, std::size_t end, double* out) {
    const std::size_t dim = x.dim;
    const double eps2 = p1 * p1;
    std::vector<double> acc(dim);
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t k = 0; k < dim; ++k) acc[k] = 0.0;
        for (std::size_t j = 0; j < x.count; ++j) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double zk = x.coords[k * x.stride + i] - x.coords[k * x.stride + j];
                r2 += zk * zk;
            }
            const double factor = kind == RadialGradKind::quadratic ? p0 : 2.0 * p0 / (eps2 + r2);
            for (std::size_t k = 0; k < dim; ++k) {
                acc[k] += factor * (x.coords[k * x.stride + i] - x.coords[k * x.stride + j]);
            }
        }
        for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] += weight * acc[k];
    }
}

double gaussian_norm(double sigma, std::size_t dim) {
    return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * static_cast<double>(dim));
}

void gaussian_density_rows_scalar(const SoAView& x, double sigma, double weight, std::size_t begin,
                                  std::size_t end, double* rho) {
    const double norm = gaussian_norm(sigma, x.dim);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = begin; i < end; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < x.count; ++j) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < x.dim; ++k) {
                const double zk = x.coords[k * x.stride + i] - x.coords[k * x.stride + j];
                r2 += zk * zk;
            }
            acc += std::exp(-r2 * inv2s2);
        }
        rho[i] = weight * norm * acc;
    }
}

void gaussian_force_rows_scalar(const SoAView& x, double sigma, const double* fp, double weight,
                                std::size_t begin, std::size_t end, double* out) {
    const std::size_t dim = x.dim;
    const double norm = gaussian_norm(sigma, dim);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double inv_s2 = 1.0 / (sigma * sigma);
    std::vector<double> acc(dim);
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t k = 0; k < dim; ++k) acc[k] = 0.0;
        for (std::size_t j = 0; j < x.count; ++j) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double zk = x.coords[k * x.stride + i] - x.coords[k * x.stride + j];
                r2 += zk * zk;
            }
            // grad chi(z) = -z / sigma^2 * chi(z); the norm is applied once per row.
            const double factor = (fp[i] + fp[j]) * std::exp(-r2 * inv2s2);
            for (std::size_t k = 0; k < dim; ++k) {
                acc[k] += factor * (x.coords[k * x.stride + i] - x.coords[k * x.stride + j]);
            }
        }
        const double row_scale = -weight * norm * inv_s2;
        for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] += row_scale * acc[k];
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        "scalar",
        &sum_sq_diff_scalar,
        &axpy2_scalar,
        &radial_gradient_rows_scalar,
        &gaussian_density_rows_scalar,
        &gaussian_force_rows_scalar,
    };
    return table;
}

}  // namespace wgflow::simd
