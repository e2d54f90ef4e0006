#include "support.hpp"

#include "wgflow/energy.hpp"
#include "wgflow/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace wgflow;
using testsupport::line;

namespace {

EnergySpec only_potential(RadialPotential v) {
    EnergySpec s;
    s.potential = v;
    return s;
}

EnergySpec only_interaction(RadialPotential w) {
    EnergySpec s;
    s.interaction = w;
    return s;
}

const double kFourPi = 4.0 * std::numbers::pi;

}  // namespace

TEST(MollifiedDensity, Examples) {
    const double x0[] = {0.0};
    EXPECT_NEAR(mollified_density(line({0.0}), 1.0, x0), 0.3989422804014327, 1e-15);
    EXPECT_NEAR(mollified_density(line({-1.0, 1.0}), 1.0, x0), 0.24197072451914337, 1e-15);
    const double far[] = {1e3};
    EXPECT_EQ(mollified_density(line({-1.0, 1.0}), 1.0, far), 0.0);
    EXPECT_THROW(mollified_density(line({0.0}), 0.0, x0), ParameterError);
}

TEST(MollifiedDensity, TwoDimensionalNormalisation) {
    ParticleEnsemble e(2, {0.0, 0.0});
    const double at[] = {0.0, 0.0};
    EXPECT_NEAR(mollified_density(e, 0.5, at), 1.0 / (2.0 * std::numbers::pi * 0.25), 1e-14);
}

TEST(EnergyValue, Examples) {
    EXPECT_EQ(energy_value(line({0.0}), only_potential(RadialPotential::quadratic(1.0))), 0.0);
    EXPECT_DOUBLE_EQ(energy_value(line({-1.0, 1.0}), only_interaction(RadialPotential::quadratic(1.0))), 0.5);
    const double e = energy_value(line({0.0, 1.0}), only_interaction(RadialPotential::log_regularized(-1.0 / kFourPi, 0.01)));
    EXPECT_NEAR(e, 0.18323191038, 1e-10);
}

TEST(EnergyValue, DomainViolationNamesParticle) {
    EnergySpec s;
    s.internal = ScalarField1D::log_regularized(1.0, -0.5);
    EXPECT_THROW(s.validate(), ParameterError);
    EnergySpec ok;
    ok.internal = ScalarField1D::log_regularized(1.0, 1e-3);
    ok.sigma = 0.1;
    EXPECT_NO_THROW(energy_value(line({0.0, 100.0}), ok));
}

TEST(Gradient, Examples) {
    EnergySpec id;
    id.internal = ScalarField1D::identity();
    const auto g1 = wasserstein_gradient(ParticleEnsemble(2, {3.0, -2.0}), id);
    EXPECT_EQ(g1.point(0)[0], 0.0);
    EXPECT_EQ(g1.point(0)[1], 0.0);

    const auto g2 = wasserstein_gradient(line({1.0, -1.0}), only_interaction(RadialPotential::quadratic(1.0)));
    EXPECT_DOUBLE_EQ(g2.point(0)[0], 1.0);
    EXPECT_DOUBLE_EQ(g2.point(1)[0], -1.0);

    const auto g3 = wasserstein_gradient(ParticleEnsemble(2, {3.0, 4.0}), only_potential(RadialPotential::quadratic_paper()));
    EXPECT_EQ(g3.point(0)[0], 6.0);
    EXPECT_EQ(g3.point(0)[1], 8.0);
}

TEST(Gradient, LiftedNormExamples) {
    const auto v = only_potential(RadialPotential::quadratic(1.0));
    EXPECT_EQ(lifted_gradient_norm(line({0.0}), v), 0.0);
    EXPECT_DOUBLE_EQ(lifted_gradient_norm(ParticleEnsemble(2, {3.0, 4.0}), v), 5.0);
    EXPECT_DOUBLE_EQ(lifted_gradient_norm(line({1.0, -1.0}), only_interaction(RadialPotential::quadratic(1.0))), 1.0);
}

namespace {

EnergySpec full_spec() {
    EnergySpec s;
    s.internal = ScalarField1D::log_regularized(0.5, 0.05);
    s.sigma = 0.7;
    s.potential = RadialPotential::quadratic_paper();
    s.interaction = RadialPotential::log_regularized(-0.3, 0.2);
    return s;
}

double directional_fd(const ParticleEnsemble& x, const GradientField& v, const EnergySpec& s, double h) {
    auto shifted = [&](double t) {
        ParticleEnsemble y = x;
        for (std::size_t k = 0; k < y.flat().size(); ++k) y.flat()[k] += t * v.flat()[k];
        return energy_value(y, s);
    };
    return (shifted(h) - shifted(-h)) / (2.0 * h);
}

double mean_inner(const GradientField& g, const GradientField& v) {
    double acc = 0.0;
    for (std::size_t k = 0; k < g.flat().size(); ++k) acc += g.flat()[k] * v.flat()[k];
    return acc / static_cast<double>(g.size());
}

// Internal-energy gradient without the f'(rho_j) term, doubled to keep the
// right scale: a plausible but wrong discretisation.
GradientField unsymmetrized_internal(const ParticleEnsemble& x, const EnergySpec& s) {
    const std::size_t n = x.size();
    const std::size_t d = x.dim();
    GradientField g(n, d);
    const double norm = std::pow(2.0 * std::numbers::pi * s.sigma * s.sigma, -0.5 * static_cast<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = mollified_density(x, s.sigma, x.point(i));
        const double fp = s.internal.d1(rho);
        for (std::size_t j = 0; j < n; ++j) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) r2 += std::pow(x.point(i)[k] - x.point(j)[k], 2);
            const double chi = norm * std::exp(-r2 / (2.0 * s.sigma * s.sigma));
            for (std::size_t k = 0; k < d; ++k) {
                g.point(i)[k] += 2.0 * fp * (-(x.point(i)[k] - x.point(j)[k]) / (s.sigma * s.sigma)) * chi / n;
            }
        }
    }
    return g;
}

}  // namespace

TEST(Gradient, CentralDifferenceConsistency) {
    const EnergySpec s = full_spec();
    const auto x = testsupport::random_ensemble(9, 2, 5, 0, 0.6);
    const auto v = testsupport::random_ensemble(9, 2, 5, 1);
    const double exact = mean_inner(wasserstein_gradient(x, s), v);
    const double e1 = std::abs(directional_fd(x, v, s, 1e-2) - exact);
    const double e2 = std::abs(directional_fd(x, v, s, 1e-3) - exact);
    EXPECT_LT(e2, 1e-6);
    EXPECT_GT(std::log10(e1 / e2), 1.9);
}

TEST(Gradient, SymmetrizedTermIsRequired) {
    EnergySpec s;
    s.internal = ScalarField1D::log_regularized(0.5, 0.05);
    s.sigma = 0.7;
    const auto x = testsupport::random_ensemble(9, 2, 6, 0, 0.6);
    const auto v = testsupport::random_ensemble(9, 2, 6, 1);
    const double fd = directional_fd(x, v, s, 1e-4);
    const double right = mean_inner(wasserstein_gradient(x, s), v);
    const double wrong = mean_inner(unsymmetrized_internal(x, s), v);
    EXPECT_NEAR(fd, right, 1e-7);
    EXPECT_GT(std::abs(fd - wrong), 1e-3);
}

TEST(Gradient, PartsSumToTotal) {
    const EnergySpec s = full_spec();
    const auto x = testsupport::random_ensemble(11, 3, 8);
    const auto g = wasserstein_gradient(x, s);
    const auto parts = wasserstein_gradient_parts(x, s);
    for (std::size_t k = 0; k < g.flat().size(); ++k) {
        EXPECT_NEAR(g.flat()[k], parts.internal.flat()[k] + parts.potential.flat()[k] + parts.interaction.flat()[k],
                    1e-12);
    }
}

TEST(Gradient, InteractionForceBalance) {
    const EnergySpec s = full_spec();
    const auto x = testsupport::random_ensemble(40, 2, 9, 0, 2.0);
    const auto parts = wasserstein_gradient_parts(x, s);
    for (std::size_t k = 0; k < 2; ++k) {
        double sum = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum += parts.interaction.point(i)[k];
            sum += parts.internal.point(i)[k];
            scale = std::max(scale, std::abs(parts.interaction.point(i)[k]) + std::abs(parts.internal.point(i)[k]));
        }
        EXPECT_LE(std::abs(sum), 1e-12 * x.size() * std::max(scale, 1.0));
    }
}

TEST(Gradient, PermutationEquivariance) {
    const EnergySpec s = full_spec();
    const auto x = testsupport::random_ensemble(7, 2, 10);
    const std::vector<std::size_t> perm = {3, 0, 6, 1, 5, 2, 4};
    std::vector<double> pos;
    for (std::size_t i : perm) pos.insert(pos.end(), x.point(i).begin(), x.point(i).end());
    const ParticleEnsemble y(2, pos);
    EXPECT_NEAR(energy_value(y, s), energy_value(x, s), 1e-13);
    const auto gx = wasserstein_gradient(x, s);
    const auto gy = wasserstein_gradient(y, s);
    for (std::size_t a = 0; a < perm.size(); ++a) {
        for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(gy.point(a)[k], gx.point(perm[a])[k], 1e-13);
    }
}

TEST(Gradient, TranslationInvarianceWithoutPotential) {
    EnergySpec s = full_spec();
    s.potential = RadialPotential::none();
    const auto x = testsupport::random_ensemble(8, 3, 12);
    ParticleEnsemble y = x;
    const double shift[] = {0.75, -1.5, 2.0};
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) y.point(i)[k] += shift[k];
    }
    EXPECT_NEAR(energy_value(y, s), energy_value(x, s), 1e-12);
    const auto gx = wasserstein_gradient(x, s);
    const auto gy = wasserstein_gradient(y, s);
    for (std::size_t k = 0; k < gx.flat().size(); ++k) EXPECT_NEAR(gy.flat()[k], gx.flat()[k], 1e-12);
}

TEST(Gradient, PotentialOnlyEqualsGradV) {
    const auto x = testsupport::random_ensemble(5, 2, 13);
    const auto g = wasserstein_gradient(x, only_potential(RadialPotential::quadratic(2.5)));
    for (std::size_t k = 0; k < g.flat().size(); ++k) EXPECT_DOUBLE_EQ(g.flat()[k], 2.5 * x.flat()[k]);
}

TEST(ConvexityProbe, Examples) {
    const auto quad = only_potential(RadialPotential::quadratic(1.0));
    auto r = convexity_probe(line({2.0}), line({1.0}), quad, 1e-3);
    EXPECT_NEAR(r.first, 2.0, 1e-12);
    EXPECT_NEAR(r.second, 1.0, 1e-6);

    r = convexity_probe(line({2.0}), line({0.0}), quad, 1e-3);
    EXPECT_EQ(r.first, 0.0);
    EXPECT_EQ(r.second, 0.0);

    // Energy along the path is (1/2)(1 + t)^2.
    r = convexity_probe(line({1.0, -1.0}), line({1.0, -1.0}), only_interaction(RadialPotential::quadratic(1.0)), 1e-3);
    EXPECT_NEAR(r.first, 1.0, 1e-12);
    EXPECT_NEAR(r.second, 1.0, 1e-6);
}

TEST(ConvexityProbe, QuadraticPaperSecondDerivative) {
    const auto x = testsupport::random_ensemble(10, 2, 14);
    const auto v = testsupport::random_ensemble(10, 2, 15);
    double nv = 0.0;
    for (double c : v.flat()) nv += c * c;
    nv /= 10.0;
    const auto r = convexity_probe(x, v, only_potential(RadialPotential::quadratic_paper()), 1e-2);
    EXPECT_LT(testsupport::rel_diff(r.second, 2.0 * nv), 1e-8);
    EXPECT_THROW(convexity_probe(x, line({1.0}), only_potential(RadialPotential::quadratic_paper()), 1e-2),
                 ComparabilityError);
}

TEST(Estimates, LambdaAndLipschitzOnQuadratics) {
    const auto base = testsupport::random_ensemble(6, 2, 16);
    for (double a : {1.0, 2.5, 3.0}) {
        const auto s = only_potential(RadialPotential::quadratic(a));
        EXPECT_NEAR(estimate_lambda(s, base, 8, 0.1, 3), a, 1e-12 * a);
        EXPECT_NEAR(estimate_lipschitz(s, base, 8, 0.1, 3), a, 1e-12 * a);
    }
    EXPECT_EQ(estimate_lambda(EnergySpec{}, base, 4, 0.1, 0), 0.0);
    EXPECT_EQ(estimate_lipschitz(EnergySpec{}, base, 4, 0.1, 0), 0.0);
    EXPECT_THROW(estimate_lambda(EnergySpec{}, base, 0, 0.1, 0), ParameterError);
    EXPECT_THROW(estimate_lipschitz(EnergySpec{}, base, 1, 0.0, 0), ParameterError);
}

TEST(Estimates, DeterministicGivenSeed) {
    const auto s = full_spec();
    const auto base = testsupport::random_ensemble(6, 2, 17);
    EXPECT_EQ(estimate_lipschitz(s, base, 6, 0.05, 9), estimate_lipschitz(s, base, 6, 0.05, 9));
    EXPECT_EQ(estimate_lambda(s, base, 6, 0.05, 9), estimate_lambda(s, base, 6, 0.05, 9));
}

TEST(SpecDigest, DistinguishesParameters) {
    EnergySpec a = full_spec();
    EnergySpec b = a;
    b.sigma = 0.71;
    EXPECT_EQ(spec_digest(a), spec_digest(full_spec()));
    EXPECT_NE(spec_digest(a), spec_digest(b));
    EXPECT_EQ(spec_digest(a).size(), 16u);
}
