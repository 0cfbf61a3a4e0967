#include <gtest/gtest.h>

#include <cmath>

#include "dlsq/autodiff_fit.hpp"
#include "dlsq/errors.hpp"
#include "oracles.hpp"

namespace dlsq {
namespace {

// Central differences of beta_0 computed here, independently of check_gradients.
double beta0_fd(WeightedPointSet p, std::vector<double> WeightedPointSet::*field, std::size_t i, double lambda) {
    FitOptions frozen;
    frozen.fixed_damping = lambda;
    const double theta = (p.*field)[i];
    const double h = 1e-5 * std::max(1.0, std::abs(theta));
    auto at = [&](double v) {
        (p.*field)[i] = v;
        return solve_weighted_ls(p, 3, frozen).first[0];
    };
    return oracle::central_difference(at, theta, h);
}

TEST(BackwardFit, ExactFitHasZeroWeightGradient) {
    WeightedPointSet p{{0, 0.25, 0.5, 0.75, 1}, {}, {0.3, 0.9, 1.0, 0.5, 0.7}};
    for (double x : p.xs) p.ys.push_back(0.2 - x + 0.5 * x * x);
    const auto [beta, ctx] = solve_weighted_ls(p, 3);
    const FitGradients g = backward_fit(ctx, {{0.4, -1.3, 2.0}});
    for (double d : g.d_w) EXPECT_NEAR(d, 0.0, 1e-12);
}

TEST(BackwardFit, ZeroSeedGivesZeroGradients) {
    Rng rng(1);
    const auto [beta, ctx] = solve_weighted_ls(oracle::random_points(rng, 10), 3);
    const FitGradients g = backward_fit(ctx, {{0, 0, 0}});
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(g.d_w[i], 0.0);
        EXPECT_EQ(g.d_y[i], 0.0);
        EXPECT_EQ(g.d_x[i], 0.0);
    }
}

TEST(BackwardFit, MatchesFiniteDifferencesOfBeta0) {
    Rng rng(42);
    const WeightedPointSet p = oracle::random_points(rng, 10);
    const auto [beta, ctx] = solve_weighted_ls(p, 3);
    const FitGradients g = backward_fit(ctx, {{1, 0, 0}});
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double fw = beta0_fd(p, &WeightedPointSet::ws, i, ctx.damping());
        const double fy = beta0_fd(p, &WeightedPointSet::ys, i, ctx.damping());
        const double fx = beta0_fd(p, &WeightedPointSet::xs, i, ctx.damping());
        EXPECT_LE(std::abs(g.d_w[i] - fw), 1e-5 * std::abs(fw) + 1e-9) << i;
        EXPECT_LE(std::abs(g.d_y[i] - fy), 1e-5 * std::abs(fy) + 1e-9) << i;
        EXPECT_LE(std::abs(g.d_x[i] - fx), 1e-5 * std::abs(fx) + 1e-9) << i;
    }
}

TEST(BackwardFit, RejectsSeedOfWrongLength) {
    Rng rng(2);
    const auto [beta, ctx] = solve_weighted_ls(oracle::random_points(rng, 6), 2);
    EXPECT_THROW(backward_fit(ctx, {{1, 2, 3}}), LengthMismatch);
}

TEST(BackwardFit, LinearInSeed) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(4);
        const WeightedPointSet p = oracle::random_points(rng, n + 4 + rng.below(10));
        if (oracle::normal_condition(p, n) > 1e4) continue;
        const auto [beta, ctx] = solve_weighted_ls(p, n);
        UpstreamGrad g1, g2, mix;
        const double a = rng.uniform(-2, 2);
        const double b = rng.uniform(-2, 2);
        for (std::size_t j = 0; j < n; ++j) {
            g1.g.push_back(rng.uniform(-1, 1));
            g2.g.push_back(rng.uniform(-1, 1));
            mix.g.push_back(a * g1.g[j] + b * g2.g[j]);
        }
        const FitGradients r1 = backward_fit(ctx, g1);
        const FitGradients r2 = backward_fit(ctx, g2);
        const FitGradients rm = backward_fit(ctx, mix);
        for (std::size_t i = 0; i < ctx.m(); ++i) {
            // Entrywise 1e-12, relative to the magnitude of the combined terms.
            auto tol = [&](double u, double v) { return 1e-12 * std::max(1.0, std::abs(a * u) + std::abs(b * v)); };
            EXPECT_NEAR(rm.d_w[i], a * r1.d_w[i] + b * r2.d_w[i], tol(r1.d_w[i], r2.d_w[i]));
            EXPECT_NEAR(rm.d_y[i], a * r1.d_y[i] + b * r2.d_y[i], tol(r1.d_y[i], r2.d_y[i]));
            EXPECT_NEAR(rm.d_x[i], a * r1.d_x[i] + b * r2.d_x[i], tol(r1.d_x[i], r2.d_x[i]));
        }
    }
}

TEST(BackwardFit, ZeroWeightPointIsInsensitive) {
    Rng rng(4);
    WeightedPointSet p = oracle::random_points(rng, 9);
    p.ws[3] = 0.0;
    const auto [beta, ctx] = solve_weighted_ls(p, 3);
    const FitGradients g = backward_fit(ctx, {{0.3, 1.0, -0.7}});
    EXPECT_EQ(g.d_y[3], 0.0);
    EXPECT_EQ(g.d_x[3], 0.0);
    EXPECT_EQ(g.d_w[3], 0.0);
}

TEST(CheckGradients, RandomLineInstancePasses) {
    Rng rng(8);
    const WeightedPointSet p = oracle::random_points(rng, 8);
    const GradCheckReport report = check_gradients(p, 2, {{0.6, -1.1}}, 1e-5);
    EXPECT_EQ(report.entries.size(), 24u);
    EXPECT_TRUE(report.passes(1e-5, 1e-9)) << report.max_rel_error();
    EXPECT_LE(report.max_rel_error(), 1e-5);
}

TEST(CheckGradients, DuplicateXIsDegenerate) {
    const WeightedPointSet p{{0.4, 0.4, 0.4}, {1, 2, 3}, {1, 1, 1}};
    EXPECT_THROW(check_gradients(p, 3, {{1, 0, 0}}, 1e-5), DegenerateSystem);
}

TEST(CheckGradients, ExactFitWeightEntriesPassUnderFloor) {
    WeightedPointSet p{{0, 0.2, 0.4, 0.6, 0.8, 1.0}, {}, {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}};
    for (double x : p.xs) p.ys.push_back(1.0 + 2.0 * x);
    const GradCheckReport report = check_gradients(p, 2, {{1, 1}}, 1e-5);
    for (const auto& e : report.entries) {
        if (e.kind == InputKind::weight) EXPECT_LE(e.abs_error, 1e-9);
    }
    EXPECT_TRUE(report.passes(1e-5, 1e-9));
}

TEST(CheckGradients, ZeroWeightEntryIsProbedSymmetrically) {
    Rng rng(12);
    WeightedPointSet p = oracle::random_points(rng, 7);
    p.ws[0] = 0.0;
    const GradCheckReport report = check_gradients(p, 2, {{1, -1}}, 1e-5);
    EXPECT_TRUE(report.passes(1e-5, 1e-9));
}

TEST(CheckGradients, RejectsNonPositiveStep) {
    Rng rng(13);
    EXPECT_THROW(check_gradients(oracle::random_points(rng, 5), 2, {{1, 0}}, 0.0), InvalidConfig);
}

}  // namespace
}  // namespace dlsq
