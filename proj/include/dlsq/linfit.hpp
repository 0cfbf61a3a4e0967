#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dlsq/types.hpp"

namespace dlsq {

/// Returns [1, x, x^2, ..., x^(n-1)].
std::vector<double> vandermonde_row(double x, std::size_t n);

struct FitOptions {
    /// Relative Tikhonov damping: lambda = damping_scale * max(1, trace(A)/n).
    double damping_scale = 1e-10;
    /// When set, used verbatim as lambda (the gradient checker freezes it this way).
    std::optional<double> fixed_damping;
    /// Iterative-refinement sweeps against the undamped normal matrix. Each sweep
    /// shrinks the damping bias by lambda / (sigma_min + lambda); 0 returns the
    /// plain damped solution.
    std::size_t refine_steps = 3;
    /// An undamped Cholesky pivot below rank_tol times its diagonal entry marks
    /// the system as rank deficient.
    double rank_tol = 1e-12;
};

/// Intermediates of a forward solve, consumed by backward_fit.
///
/// The normal matrix N = sum_i w_i^2 v(x_i) v(x_i)^T is kept alongside the
/// lower Cholesky factor L of N + lambda I (row-major n x n).
class FitContext {
public:
    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    double damping() const noexcept { return damping_; }
    const CurveParams& beta() const noexcept { return beta_; }
    std::span<const double> residuals() const noexcept { return residuals_; }
    std::span<const double> xs() const noexcept { return xs_; }
    std::span<const double> ws() const noexcept { return ws_; }
    /// Vandermonde row of point i.
    std::span<const double> row(std::size_t i) const noexcept { return {rows_.data() + i * n_, n_}; }
    std::span<const double> cholesky_factor() const noexcept { return chol_; }
    std::span<const double> normal_matrix() const noexcept { return normal_; }

    /// Solves (N + lambda I) s = rhs with the cached factor, then refines toward
    /// N s = rhs with the configured number of sweeps.
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    friend std::pair<CurveParams, FitContext> solve_weighted_ls(const WeightedPointSet&, std::size_t,
                                                                const FitOptions&);

    std::size_t n_ = 0;
    std::size_t m_ = 0;
    double damping_ = 0.0;
    std::size_t refine_steps_ = 0;
    std::vector<double> chol_;
    std::vector<double> normal_;
    CurveParams beta_;
    std::vector<double> rows_;
    std::vector<double> residuals_;
    std::vector<double> xs_;
    std::vector<double> ws_;
};

/// Weighted least squares: minimizes sum_i w_i^2 (v(x_i)^T beta - y_i)^2 by a
/// Cholesky factorization of the damped normal matrix N + lambda I followed by
/// iterative refinement on N.
///
/// Weights act as the diagonal W applied to both X and Y, so they enter the
/// normal equations squared. Throws InvalidWeight for negative/non-finite
/// weights and DegenerateSystem when the normal matrix is rank deficient.
std::pair<CurveParams, FitContext> solve_weighted_ls(const WeightedPointSet& points, std::size_t n,
                                                     const FitOptions& options = {});

/// Ordinary least squares; the weights of `points` are ignored and taken as 1.
std::pair<CurveParams, FitContext> solve_ls(const WeightedPointSet& points, std::size_t n,
                                            const FitOptions& options = {});

}  // namespace dlsq
