#include <gtest/gtest.h>

#include <cmath>

#include "dlsq/errors.hpp"
#include "dlsq/homography.hpp"
#include "oracles.hpp"

namespace dlsq {
namespace {

Homography random_homography(Rng& rng) {
    // Near-identity with a mild projective row keeps denominators away from zero on [0, 1]^2.
    return Homography({1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.5),
                       rng.uniform(-0.3, 0.3), 1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.5),
                       rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 1.0});
}

WeightedPointSet random_unit_square(Rng& rng, std::size_t m) {
    WeightedPointSet p;
    for (std::size_t i = 0; i < m; ++i) {
        p.xs.push_back(rng.uniform());
        p.ys.push_back(rng.uniform());
        p.ws.push_back(rng.uniform());
    }
    return p;
}

TEST(TransformPoints, Identity) {
    const WeightedPointSet p{{0.1, 0.5, 2.0}, {0.3, -1.0, 4.0}, {0.2, 0.0, 1.0}};
    const WeightedPointSet q = transform_points(Homography::identity(), p);
    EXPECT_EQ(q.xs, p.xs);
    EXPECT_EQ(q.ys, p.ys);
    EXPECT_EQ(q.ws, p.ws);
}

TEST(TransformPoints, Scaling) {
    const WeightedPointSet p{{0.1, 0.5}, {0.3, -1.0}, {0.2, 0.7}};
    const WeightedPointSet q = transform_points(Homography({2, 0, 0, 0, 2, 0, 0, 0, 1}), p);
    EXPECT_EQ(q.xs, (std::vector<double>{0.2, 1.0}));
    EXPECT_EQ(q.ys, (std::vector<double>{0.6, -2.0}));
    EXPECT_EQ(q.ws, p.ws);
}

TEST(TransformPoints, ProjectiveDenominator) {
    const Homography H({1, 2, 3, 4, 5, 6, 0, 1, 1});
    const WeightedPointSet q = transform_points(H, {{1}, {1}, {0.5}});
    // d = 0 + 1 + 1 = 2
    EXPECT_DOUBLE_EQ(q.xs[0], 6.0 / 2.0);
    EXPECT_DOUBLE_EQ(q.ys[0], 15.0 / 2.0);
}

TEST(TransformPoints, NearInfinityReportsFirstIndex) {
    const Homography H({1, 0, 0, 0, 1, 0, 1, 0, -1});
    try {
        transform_points(H, {{0.5, 1.0, 1.0}, {0, 0, 0}, {1, 1, 1}});
        FAIL() << "expected NearInfinityPoint";
    } catch (const NearInfinityPoint& e) {
        EXPECT_EQ(e.index(), 1u);
    }
}

TEST(Homography, RejectsSingularOrNonFinite) {
    EXPECT_THROW(Homography({1, 2, 3, 2, 4, 6, 0, 0, 1}), InvalidConfig);
    EXPECT_THROW(Homography({1, 0, 0, 0, NAN, 0, 0, 0, 1}), InvalidConfig);
}

TEST(BackwardTransform, IdentityAndZeroSeed) {
    Rng rng(1);
    const WeightedPointSet p = random_unit_square(rng, 5);
    const PointGrads seed{{1, 2, 3, 4, 5}, {-1, -2, -3, -4, -5}};
    const PointGrads g = backward_transform(Homography::identity(), p, seed);
    EXPECT_EQ(g.gx, seed.gx);
    EXPECT_EQ(g.gy, seed.gy);

    const PointGrads z = backward_transform(random_homography(rng), p, {std::vector<double>(5), std::vector<double>(5)});
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(z.gx[i], 0.0);
        EXPECT_EQ(z.gy[i], 0.0);
    }
}

TEST(BackwardTransform, MatchesFiniteDifferences) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Homography H = random_homography(rng);
        const WeightedPointSet p = random_unit_square(rng, 6);
        PointGrads seed;
        for (std::size_t i = 0; i < p.size(); ++i) {
            seed.gx.push_back(rng.uniform(-1, 1));
            seed.gy.push_back(rng.uniform(-1, 1));
        }
        const PointGrads g = backward_transform(H, p, seed);
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (auto field : {&WeightedPointSet::xs, &WeightedPointSet::ys}) {
                auto f = [&](double v) {
                    WeightedPointSet q = p;
                    (q.*field)[i] = v;
                    const WeightedPointSet out = transform_points(H, q);
                    double l = 0.0;
                    for (std::size_t k = 0; k < out.size(); ++k) l += seed.gx[k] * out.xs[k] + seed.gy[k] * out.ys[k];
                    return l;
                };
                const double theta = (p.*field)[i];
                const double fd = oracle::central_difference(f, theta, 1e-5 * std::max(1.0, std::abs(theta)));
                const double an = field == &WeightedPointSet::xs ? g.gx[i] : g.gy[i];
                EXPECT_LE(std::abs(an - fd), 1e-6 * std::max(std::abs(fd), 1e-3));
            }
        }
    }
}

TEST(HomographyProperty, CompositionAndInverse) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Homography h1 = random_homography(rng);
        const Homography h2 = random_homography(rng);
        const WeightedPointSet p = random_unit_square(rng, 10);
        const WeightedPointSet two_step = transform_points(h2, transform_points(h1, p));
        const WeightedPointSet composed = transform_points(h2 * h1, p);
        const WeightedPointSet back = transform_points(h1.inverse(), transform_points(h1, p));
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(two_step.xs[i], composed.xs[i], 1e-10);
            EXPECT_NEAR(two_step.ys[i], composed.ys[i], 1e-10);
            EXPECT_NEAR(back.xs[i], p.xs[i], 1e-9);
            EXPECT_NEAR(back.ys[i], p.ys[i], 1e-9);
        }
        EXPECT_EQ(two_step.ws, p.ws);
        EXPECT_EQ(composed.ws, p.ws);
    }
}

}  // namespace
}  // namespace dlsq
