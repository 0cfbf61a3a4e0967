#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "dlsq/linfit.hpp"
#include "dlsq/types.hpp"

namespace dlsq {

/// Adjoint seed dL/dbeta.
struct UpstreamGrad {
    std::vector<double> g;
};

/// dL/dw_i, dL/dy_i and dL/dx_i for every point of a fit.
struct FitGradients {
    std::vector<double> d_w;
    std::vector<double> d_y;
    std::vector<double> d_x;
};

/// Reverse-mode gradient of L = g^T beta through the damped normal equations.
///
/// With s = A^{-1} g, r_i the residual and p the fitted polynomial:
///   dL/dw_i = 2 w_i (s^T v_i) r_i
///   dL/dy_i = w_i^2 (s^T v_i)
///   dL/dx_i = w_i^2 ((s^T v'_i) r_i - (s^T v_i) p'(x_i))
/// The damping lambda is held constant.
FitGradients backward_fit(const FitContext& ctx, const UpstreamGrad& g);

enum class InputKind { weight, y, x };

std::string_view to_string(InputKind kind);

struct GradCheckEntry {
    InputKind kind;
    std::size_t index;
    double analytic;
    double numeric;
    double rel_error;  // |analytic - numeric| / max(1e-12, |numeric|)
    double abs_error;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;

    double max_rel_error() const;
    double max_abs_error() const;
    /// True when every entry satisfies rel_error <= rel_tol or abs_error <= abs_floor.
    bool passes(double rel_tol, double abs_floor) const;
    /// Entry with the largest error after the absolute floor is applied.
    const GradCheckEntry* worst(double abs_floor) const;
};

/// Compares backward_fit against central differences of L = g^T beta for
/// every w_i, y_i and x_i, with h = step * max(1, |theta|).
///
/// Perturbed solves reuse the damping of the unperturbed fit.
GradCheckReport check_gradients(const WeightedPointSet& points, std::size_t n, const UpstreamGrad& g,
                                double step = 1e-5, const FitOptions& options = {});

}  // namespace dlsq
