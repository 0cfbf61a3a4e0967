#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dlsq/errors.hpp"
#include "dlsq/linfit.hpp"
#include "oracles.hpp"

namespace dlsq {
namespace {

WeightedPointSet unit_points(std::vector<double> xs, std::vector<double> ys) {
    WeightedPointSet p{std::move(xs), std::move(ys), {}};
    p.ws.assign(p.xs.size(), 1.0);
    return p;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        num = std::max(num, std::abs(a[j] - b[j]));
        den = std::max(den, std::abs(b[j]));
    }
    return num / std::max(den, 1e-300);
}

TEST(VandermondeRow, Examples) {
    EXPECT_EQ(vandermonde_row(0.0, 3), (std::vector<double>{1, 0, 0}));
    EXPECT_EQ(vandermonde_row(1.0, 4), (std::vector<double>{1, 1, 1, 1}));
    EXPECT_EQ(vandermonde_row(2.0, 3), (std::vector<double>{1, 2, 4}));
}

TEST(EvaluateCurve, Examples) {
    EXPECT_EQ(evaluate_curve({{1, 2}}, 0.0), 1.0);
    EXPECT_EQ(evaluate_curve({{0, 0, 1}}, 3.0), 9.0);
    EXPECT_EQ(evaluate_curve({{1, -1, 0.5}}, 2.0), 1.0);
}

TEST(SolveLs, ExactLine) {
    const auto [beta, ctx] = solve_ls(unit_points({0, 1, 2}, {1, 3, 5}), 2);
    EXPECT_NEAR(beta[0], 1.0, 1e-9);
    EXPECT_NEAR(beta[1], 2.0, 1e-9);
}

TEST(SolveLs, ExactParabola) {
    const auto [beta, ctx] = solve_ls(unit_points({0, 1, 2}, {0, 1, 4}), 3);
    EXPECT_NEAR(beta[0], 0.0, 1e-9);
    EXPECT_NEAR(beta[1], 0.0, 1e-9);
    EXPECT_NEAR(beta[2], 1.0, 1e-9);
}

TEST(SolveLs, IgnoresWeights) {
    WeightedPointSet p{{0, 1, 2, 3}, {0.3, 1.1, 1.9, 3.2}, {0.0, 5.0, 0.1, 2.0}};
    const auto [beta, ctx] = solve_ls(p, 2);
    const auto expected = oracle::weighted_fit(unit_points(p.xs, p.ys), 2);
    EXPECT_LT(max_rel_diff(beta.coeffs, expected), 1e-12);
}

TEST(SolveLs, MatchesDenseNormalEquations) {
    Rng rng(7);
    WeightedPointSet p = oracle::random_points(rng, 7);
    p.ws.assign(7, 1.0);
    const auto [beta, ctx] = solve_ls(p, 3);
    EXPECT_LT(max_rel_diff(beta.coeffs, oracle::weighted_fit(p, 3)), 1e-10);
}

TEST(SolveWeightedLs, ZeroWeightPointExcluded) {
    WeightedPointSet p{{0, 1, 2}, {0, 1, 100}, {1, 1, 0}};
    const auto [beta, ctx] = solve_weighted_ls(p, 2);
    EXPECT_NEAR(beta[0], 0.0, 1e-9);
    EXPECT_NEAR(beta[1], 1.0, 1e-9);
}

TEST(SolveWeightedLs, UniformWeightMatchesUnweighted) {
    Rng rng(11);
    WeightedPointSet p = oracle::random_points(rng, 9);
    p.ws.assign(p.size(), 0.7);
    const auto [weighted, c1] = solve_weighted_ls(p, 3);
    const auto [plain, c2] = solve_ls(p, 3);
    EXPECT_LT(max_rel_diff(weighted.coeffs, plain.coeffs), 1e-9);
}

TEST(SolveWeightedLs, MatchesDenseOracleWithRandomWeights) {
    Rng rng(3);
    WeightedPointSet p = oracle::random_points(rng, 6, 1e-3, 1.0);
    const auto [beta, ctx] = solve_weighted_ls(p, 3);
    EXPECT_LT(max_rel_diff(beta.coeffs, oracle::weighted_fit(p, 3)), 1e-10);
}

TEST(SolveWeightedLs, RejectsNegativeOrNonFiniteWeight) {
    WeightedPointSet p{{0, 1, 2}, {0, 1, 2}, {1, -0.5, 1}};
    EXPECT_THROW(solve_weighted_ls(p, 2), InvalidWeight);
    p.ws[1] = NAN;
    EXPECT_THROW(solve_weighted_ls(p, 2), InvalidWeight);
}

TEST(SolveWeightedLs, RejectsMismatchedLengths) {
    WeightedPointSet p{{0, 1, 2}, {0, 1}, {1, 1, 1}};
    EXPECT_THROW(solve_weighted_ls(p, 2), LengthMismatch);
}

TEST(SolveWeightedLs, DuplicateXIsDegenerate) {
    EXPECT_THROW(solve_ls(unit_points({0.5, 0.5}, {1, 2}), 2), DegenerateSystem);
    EXPECT_THROW(solve_ls(unit_points({0.2, 0.2, 0.7, 0.7}, {1, 2, 3, 4}), 3), DegenerateSystem);
}

TEST(SolveWeightedLs, TooFewPositiveWeightsIsDegenerate) {
    WeightedPointSet p{{0, 1, 2}, {0, 1, 2}, {1, 0, 0}};
    EXPECT_THROW(solve_weighted_ls(p, 2), DegenerateSystem);
}

TEST(SolveWeightedLs, ContextCachesIntermediates) {
    Rng rng(5);
    const WeightedPointSet p = oracle::random_points(rng, 10);
    const auto [beta, ctx] = solve_weighted_ls(p, 3);
    ASSERT_EQ(ctx.n(), 3u);
    ASSERT_EQ(ctx.m(), 10u);
    EXPECT_GT(ctx.damping(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_EQ(ctx.residuals()[i], p.ys[i] - evaluate_curve(beta, p.xs[i]));
        const auto row = ctx.row(i);
        EXPECT_EQ(row[0], 1.0);
        EXPECT_DOUBLE_EQ(row[2], p.xs[i] * p.xs[i]);
    }
    // L L^T reproduces the damped normal matrix.
    auto sys = oracle::normal_equations(p, 3);
    const auto l = ctx.cholesky_factor();
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k) acc += l[r * 3 + k] * l[c * 3 + k];
            const double expected = sys.a[r][c] + (r == c ? ctx.damping() : 0.0);
            EXPECT_NEAR(acc, expected, 1e-12 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST(SolveWeightedLs, DampingFollowsTrace) {
    WeightedPointSet p{{0, 1, 2}, {0, 1, 2}, {3, 3, 3}};
    const auto [beta, ctx] = solve_weighted_ls(p, 2);
    // trace = 9 * (3 + 5), mean diag = 36.
    EXPECT_DOUBLE_EQ(ctx.damping(), 1e-10 * 36.0);
    FitOptions fixed;
    fixed.fixed_damping = 0.25;
    EXPECT_EQ(solve_weighted_ls(p, 2, fixed).second.damping(), 0.25);
}

// Property sweeps over random instances.

TEST(SolveWeightedLsProperty, ExactFitReproducesCoefficients) {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(5);
        const std::size_t m = n + 2 + rng.below(20);
        CurveParams truth;
        for (std::size_t j = 0; j < n; ++j) truth.coeffs.push_back(rng.uniform(-2.0, 2.0));
        WeightedPointSet p = oracle::random_points(rng, m, 0.2, 1.0);
        for (std::size_t i = 0; i < m; ++i) p.ys[i] = truth(p.xs[i]);
        // A few outliers with zero weight must not matter.
        p.xs.push_back(0.5);
        p.ys.push_back(50.0);
        p.ws.push_back(0.0);
        if (oracle::normal_condition(p, n) > 1e7) continue;
        const auto [beta, ctx] = solve_weighted_ls(p, n);
        for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(beta[j], truth[j], 1e-9) << "trial " << trial;
    }
}

TEST(SolveWeightedLsProperty, WeightScalingInvariance) {
    Rng rng(202);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(4);
        WeightedPointSet p = oracle::random_points(rng, n + 3 + rng.below(20));
        if (oracle::normal_condition(p, n) > 1e6) continue;
        const double c = rng.uniform(0.5, 20.0);
        WeightedPointSet scaled = p;
        for (double& w : scaled.ws) w *= c;
        const auto [b1, c1] = solve_weighted_ls(p, n);
        const auto [b2, c2] = solve_weighted_ls(scaled, n);
        for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(b1[j], b2[j], 1e-9) << "trial " << trial;
    }
}

}  // namespace
}  // namespace dlsq
