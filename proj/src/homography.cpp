#include "dlsq/homography.hpp"

#include <cmath>
#include <string>

#include "dlsq/errors.hpp"

namespace dlsq {

namespace {

constexpr double kDenominatorGuard = 1e-12;
constexpr double kSingularGuard = 1e-12;

double denominator(const Homography& H, double x, double y, std::size_t index) {
    const double d = H(2, 0) * x + H(2, 1) * y + H(2, 2);
    if (!(std::abs(d) >= kDenominatorGuard)) {
        throw NearInfinityPoint(index, "point " + std::to_string(index) + " maps to infinity (denominator " +
                                           std::to_string(d) + ")");
    }
    return d;
}

}  // namespace

Homography::Homography(const std::array<double, 9>& h) : h_(h) {
    for (double v : h_) {
        if (!std::isfinite(v)) throw InvalidConfig("homography has a non-finite entry");
    }
    if (!(std::abs(determinant()) > kSingularGuard)) {
        throw InvalidConfig("homography is singular");
    }
}

Homography Homography::identity() { return Homography({1, 0, 0, 0, 1, 0, 0, 0, 1}); }

double Homography::determinant() const noexcept {
    const auto& a = h_;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Homography Homography::inverse() const {
    const auto& a = h_;
    const double det = determinant();
    std::array<double, 9> inv{
        (a[4] * a[8] - a[5] * a[7]) / det, (a[2] * a[7] - a[1] * a[8]) / det, (a[1] * a[5] - a[2] * a[4]) / det,
        (a[5] * a[6] - a[3] * a[8]) / det, (a[0] * a[8] - a[2] * a[6]) / det, (a[2] * a[3] - a[0] * a[5]) / det,
        (a[3] * a[7] - a[4] * a[6]) / det, (a[1] * a[6] - a[0] * a[7]) / det, (a[0] * a[4] - a[1] * a[3]) / det,
    };
    return Homography(inv);
}

Homography operator*(const Homography& a, const Homography& b) {
    std::array<double, 9> out{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += a(r, k) * b(k, c);
            out[r * 3 + c] = acc;
        }
    }
    return Homography(out);
}

WeightedPointSet transform_points(const Homography& H, const WeightedPointSet& points) {
    if (points.ys.size() != points.xs.size()) {
        throw LengthMismatch("xs and ys differ in length");
    }
    WeightedPointSet out;
    out.xs.resize(points.size());
    out.ys.resize(points.size());
    out.ws = points.ws;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double x = points.xs[i];
        const double y = points.ys[i];
        const double d = denominator(H, x, y, i);
        out.xs[i] = (H(0, 0) * x + H(0, 1) * y + H(0, 2)) / d;
        out.ys[i] = (H(1, 0) * x + H(1, 1) * y + H(1, 2)) / d;
    }
    return out;
}

PointGrads backward_transform(const Homography& H, const WeightedPointSet& points, const PointGrads& g_out) {
    const std::size_t m = points.size();
    if (points.ys.size() != m || g_out.gx.size() != m || g_out.gy.size() != m) {
        throw LengthMismatch("gradient and point sequences differ in length");
    }
    PointGrads g_in;
    g_in.gx.resize(m);
    g_in.gy.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = points.xs[i];
        const double y = points.ys[i];
        const double d = denominator(H, x, y, i);
        const double u = (H(0, 0) * x + H(0, 1) * y + H(0, 2)) / d;
        const double v = (H(1, 0) * x + H(1, 1) * y + H(1, 2)) / d;
        // Quotient rule: du/dx = (h00 - u h20) / d, etc.
        const double du_dx = (H(0, 0) - u * H(2, 0)) / d;
        const double du_dy = (H(0, 1) - u * H(2, 1)) / d;
        const double dv_dx = (H(1, 0) - v * H(2, 0)) / d;
        const double dv_dy = (H(1, 1) - v * H(2, 1)) / d;
        g_in.gx[i] = g_out.gx[i] * du_dx + g_out.gy[i] * dv_dx;
        g_in.gy[i] = g_out.gx[i] * du_dy + g_out.gy[i] * dv_dy;
    }
    return g_in;
}

}  // namespace dlsq
