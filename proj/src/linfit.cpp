#include "dlsq/linfit.hpp"

#include <cmath>
#include <string>

#include "dlsq/errors.hpp"

namespace dlsq {

std::vector<double> vandermonde_row(double x, std::size_t n) {
    std::vector<double> row(n);
    double p = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        row[j] = p;
        p *= x;
    }
    return row;
}

namespace {

// Forward substitution L z = rhs, then back substitution L^T s = z.
std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double> s) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = s[i];
        for (std::size_t k = 0; k < i; ++k) acc -= l[i * n + k] * s[k];
        s[i] = acc / l[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = s[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= l[k * n + i] * s[k];
        s[i] = acc / l[i * n + i];
    }
    return s;
}

// Undamped Cholesky pass: a pivot that collapses below rank_tol times its
// original diagonal entry means the x-values cannot determine n coefficients.
bool rank_deficient(std::vector<double> a, std::size_t n, double rank_tol) {
    for (std::size_t j = 0; j < n; ++j) {
        const double diag = a[j * n + j];
        double d = diag;
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!std::isfinite(d) || !(diag > 0.0) || d <= rank_tol * diag) return true;
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
    return false;
}

}  // namespace

std::vector<double> FitContext::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) {
        throw LengthMismatch("rhs has " + std::to_string(rhs.size()) + " entries, expected " +
                             std::to_string(n_));
    }
    if (chol_.size() != n_ * n_ || n_ == 0) {
        throw DegenerateSystem("fit context holds no valid factorization");
    }
    std::vector<double> s = cholesky_solve(chol_, n_, std::vector<double>(rhs.begin(), rhs.end()));
    std::vector<double> residual(n_);
    for (std::size_t sweep = 0; sweep < refine_steps_; ++sweep) {
        for (std::size_t r = 0; r < n_; ++r) {
            double acc = rhs[r];
            for (std::size_t c = 0; c < n_; ++c) acc -= normal_[r * n_ + c] * s[c];
            residual[r] = acc;
        }
        const std::vector<double> correction = cholesky_solve(chol_, n_, residual);
        for (std::size_t r = 0; r < n_; ++r) s[r] += correction[r];
    }
    return s;
}

std::pair<CurveParams, FitContext> solve_weighted_ls(const WeightedPointSet& points, std::size_t n,
                                                     const FitOptions& options) {
    points.validate();
    if (n == 0) {
        throw InvalidConfig("polynomial must have at least one coefficient");
    }
    const std::size_t m = points.size();

    FitContext ctx;
    ctx.n_ = n;
    ctx.m_ = m;
    ctx.xs_ = points.xs;
    ctx.ws_ = points.ws;
    ctx.rows_.resize(m * n);

    std::vector<double> a(n * n, 0.0);
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* v = ctx.rows_.data() + i * n;
        double p = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            v[j] = p;
            p *= points.xs[i];
        }
        const double w2 = points.ws[i] * points.ws[i];
        if (w2 == 0.0) continue;
        for (std::size_t r = 0; r < n; ++r) {
            const double wv = w2 * v[r];
            b[r] += wv * points.ys[i];
            for (std::size_t c = 0; c <= r; ++c) a[r * n + c] += wv * v[c];
        }
    }

    double trace = 0.0;
    for (std::size_t j = 0; j < n; ++j) trace += a[j * n + j];
    const double mean_diag = trace / static_cast<double>(n);
    const double lambda = options.fixed_damping.value_or(options.damping_scale * std::max(1.0, mean_diag));
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw InvalidConfig("damping must be finite and non-negative");
    }
    ctx.damping_ = lambda;
    ctx.refine_steps_ = options.refine_steps;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) a[r * n + c] = a[c * n + r];
    }
    ctx.normal_ = a;
    for (std::size_t j = 0; j < n; ++j) a[j * n + j] += lambda;

    if (rank_deficient(ctx.normal_, n, options.rank_tol)) {
        throw DegenerateSystem("normal matrix is rank deficient (m=" + std::to_string(m) + ", n=" +
                               std::to_string(n) + ")");
    }

    // In-place lower Cholesky of N + lambda I on the lower triangle of a.
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!std::isfinite(d) || d <= 0.0) {
            throw DegenerateSystem("damped normal matrix is not positive definite at pivot " + std::to_string(j));
        }
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) a[r * n + c] = 0.0;
    }
    ctx.chol_ = std::move(a);

    ctx.beta_.coeffs = ctx.solve(b);
    for (double c : ctx.beta_.coeffs) {
        if (!std::isfinite(c)) throw DegenerateSystem("solution is not finite");
    }

    ctx.residuals_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        ctx.residuals_[i] = points.ys[i] - evaluate_curve(ctx.beta_, points.xs[i]);
    }
    CurveParams beta = ctx.beta_;
    return {std::move(beta), std::move(ctx)};
}

std::pair<CurveParams, FitContext> solve_ls(const WeightedPointSet& points, std::size_t n,
                                            const FitOptions& options) {
    WeightedPointSet unit = points;
    unit.ws.assign(points.xs.size(), 1.0);
    if (points.ys.size() != points.xs.size()) {
        throw LengthMismatch("xs and ys differ in length");
    }
    return solve_weighted_ls(unit, n, options);
}

}  // namespace dlsq
