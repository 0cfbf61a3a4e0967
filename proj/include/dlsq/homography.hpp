#pragma once

#include <array>
#include <vector>

#include "dlsq/types.hpp"

namespace dlsq {

/// 3x3 projective transform, row-major.
class Homography {
public:
    /// Throws InvalidConfig for non-finite entries or |det| <= 1e-12.
    explicit Homography(const std::array<double, 9>& h);

    static Homography identity();

    const std::array<double, 9>& data() const noexcept { return h_; }
    double operator()(int r, int c) const noexcept { return h_[r * 3 + c]; }

    double determinant() const noexcept;
    Homography inverse() const;

    /// Matrix product; (a * b) applies b first.
    friend Homography operator*(const Homography& a, const Homography& b);

private:
    std::array<double, 9> h_;
};

/// Per-point gradients with respect to (x, y).
struct PointGrads {
    std::vector<double> gx;
    std::vector<double> gy;
};

/// Maps every (x_i, y_i) through H; weights pass through untouched. Throws
/// NearInfinityPoint for the first point whose homogeneous denominator has
/// magnitude below 1e-12.
WeightedPointSet transform_points(const Homography& H, const WeightedPointSet& points);

/// Vector-Jacobian product of transform_points with respect to the input coordinates.
PointGrads backward_transform(const Homography& H, const WeightedPointSet& points, const PointGrads& g_out);

}  // namespace dlsq
