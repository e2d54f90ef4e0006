#include "support.hpp"

#include "wgflow/errors.hpp"
#include "wgflow/metrics.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace wgflow;
using testsupport::line;

TEST(Ensemble, RejectsBadShapes) {
    EXPECT_THROW(ParticleEnsemble(2, std::vector<double>{1.0, 2.0, 3.0}), ParameterError);
    EXPECT_THROW(ParticleEnsemble(0, std::vector<double>{}), ParameterError);
    EXPECT_THROW(ParticleEnsemble(1, std::vector<double>{std::nan("")}), ParameterError);
}

TEST(Ensemble, SnapshotRoundTripIsExact) {
    const auto e = testsupport::random_ensemble(7, 3, 11);
    std::stringstream ss;
    write_snapshot_csv(ss, e);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "particle_index,x0,x1,x2");
    const auto back = read_snapshot_csv(ss);
    EXPECT_EQ(back, e);
}

TEST(Ensemble, SnapshotRejectsShuffledIndex) {
    std::stringstream ss("particle_index,x0\n1,0.5\n0,0.25\n");
    EXPECT_THROW(read_snapshot_csv(ss), ConfigError);
}

TEST(L2Distance, MatchesDefinition) {
    EXPECT_DOUBLE_EQ(l2_reference_distance(line({0, 1}), line({1, 0})), 1.0);
    EXPECT_DOUBLE_EQ(l2_reference_distance(line({0, 0}), line({3, 4})), std::sqrt(12.5));
    EXPECT_THROW(l2_reference_distance(line({0, 1}), line({0})), ComparabilityError);
}

TEST(ExactW2, SpecExamples) {
    const auto a = testsupport::random_ensemble(5, 2, 3);
    EXPECT_EQ(exact_w2(a, a), 0.0);
    EXPECT_NEAR(exact_w2(line({0, 1}), line({1, 0})), 0.0, 1e-15);
    EXPECT_NEAR(exact_w2(line({0, 0}), line({1, -1})), 1.0, 1e-15);
}

TEST(ExactW2, MatchesBruteForceAndIsBelowL2) {
    for (std::uint64_t s = 0; s < 60; ++s) {
        const std::size_t n = 1 + s % 7;
        const std::size_t d = 1 + s % 3;
        const auto a = testsupport::random_ensemble(n, d, s, 0);
        const auto b = testsupport::random_ensemble(n, d, s, 1);
        const double w = exact_w2(a, b);
        EXPECT_NEAR(w, testsupport::brute_force_w2(a, b), 1e-12) << "seed " << s;
        EXPECT_LE(w, l2_reference_distance(a, b));
        EXPECT_NEAR(w, exact_w2(b, a), 1e-12);
    }
}

TEST(ExactW2, TriangleInequalityAndPermutationInvariance) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto a = testsupport::random_ensemble(6, 2, s, 0);
        const auto b = testsupport::random_ensemble(6, 2, s, 1);
        const auto c = testsupport::random_ensemble(6, 2, s, 2);
        EXPECT_LE(exact_w2(a, c), exact_w2(a, b) + exact_w2(b, c) + 1e-12);
        EXPECT_LE(l2_reference_distance(a, c), l2_reference_distance(a, b) + l2_reference_distance(b, c) + 1e-12);

        // Reverse the particle order of both ensembles.
        std::vector<double> ra;
        std::vector<double> rb;
        for (std::size_t i = a.size(); i-- > 0;) {
            ra.insert(ra.end(), a.point(i).begin(), a.point(i).end());
            rb.insert(rb.end(), b.point(i).begin(), b.point(i).end());
        }
        EXPECT_NEAR(exact_w2(ParticleEnsemble(2, ra), ParticleEnsemble(2, rb)), exact_w2(a, b), 1e-12);
    }
}

TEST(ExactW2, CapacityLimit) {
    const auto a = testsupport::random_ensemble(9, 1, 1);
    EXPECT_THROW(exact_w2(a, a, 8), CapacityError);
}

TEST(ExactW2, AssignmentIsAPermutation) {
    const std::vector<double> cost = {4, 1, 3, 2, 0, 5, 3, 2, 2};
    const auto assign = solve_assignment(cost, 3);
    std::vector<std::size_t> sorted = assign;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2}));
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) total += cost[i * 3 + assign[i]];
    EXPECT_EQ(total, 5.0);
}

TEST(PushforwardBound, Examples) {
    const auto a = line({0, 0});
    const auto b = line({1, -1});
    EXPECT_EQ(lipschitz_pushforward_bound(0.0, a, b), 0.0);
    EXPECT_EQ(lipschitz_pushforward_bound(1.0, a, a), 0.0);
    EXPECT_NEAR(lipschitz_pushforward_bound(2.0, a, b), 2.0, 1e-15);
    EXPECT_THROW(lipschitz_pushforward_bound(-1.0, a, b), ParameterError);
}
