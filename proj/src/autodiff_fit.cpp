#include "dlsq/autodiff_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dlsq/errors.hpp"

namespace dlsq {

FitGradients backward_fit(const FitContext& ctx, const UpstreamGrad& g) {
    const std::size_t n = ctx.n();
    const std::size_t m = ctx.m();
    if (g.g.size() != n) {
        throw LengthMismatch("upstream gradient has " + std::to_string(g.g.size()) + " entries, expected " +
                             std::to_string(n));
    }
    const std::vector<double> s = ctx.solve(g.g);
    const CurveParams& beta = ctx.beta();
    const auto xs = ctx.xs();
    const auto ws = ctx.ws();
    const auto residuals = ctx.residuals();

    FitGradients out;
    out.d_w.resize(m);
    out.d_y.resize(m);
    out.d_x.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto v = ctx.row(i);
        double s_v = 0.0;
        double s_dv = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s_v += s[j] * v[j];
            // d/dx x^j = j x^(j-1) = j * v[j-1]
            if (j > 0) s_dv += s[j] * static_cast<double>(j) * v[j - 1];
        }
        const double w = ws[i];
        const double w2 = w * w;
        out.d_w[i] = 2.0 * w * s_v * residuals[i];
        out.d_y[i] = w2 * s_v;
        out.d_x[i] = w2 * (s_dv * residuals[i] - s_v * beta.derivative(xs[i]));
    }
    return out;
}

std::string_view to_string(InputKind kind) {
    switch (kind) {
        case InputKind::weight:
            return "w";
        case InputKind::y:
            return "y";
        case InputKind::x:
            return "x";
    }
    return "?";
}

double GradCheckReport::max_rel_error() const {
    double worst = 0.0;
    for (const auto& e : entries) worst = std::max(worst, e.rel_error);
    return worst;
}

double GradCheckReport::max_abs_error() const {
    double worst = 0.0;
    for (const auto& e : entries) worst = std::max(worst, e.abs_error);
    return worst;
}

bool GradCheckReport::passes(double rel_tol, double abs_floor) const {
    return std::all_of(entries.begin(), entries.end(), [&](const GradCheckEntry& e) {
        return std::isfinite(e.analytic) && std::isfinite(e.numeric) &&
               (e.rel_error <= rel_tol || e.abs_error <= abs_floor);
    });
}

const GradCheckEntry* GradCheckReport::worst(double abs_floor) const {
    const GradCheckEntry* out = nullptr;
    double worst = -1.0;
    for (const auto& e : entries) {
        const double score = e.abs_error <= abs_floor ? 0.0 : e.rel_error;
        if (score > worst) {
            worst = score;
            out = &e;
        }
    }
    return out;
}

namespace {

double seeded_objective(const WeightedPointSet& points, std::size_t n, const UpstreamGrad& g,
                        const FitOptions& options) {
    const auto [beta, ctx] = solve_weighted_ls(points, n, options);
    double l = 0.0;
    for (std::size_t j = 0; j < n; ++j) l += g.g[j] * beta[j];
    return l;
}

}  // namespace

GradCheckReport check_gradients(const WeightedPointSet& points, std::size_t n, const UpstreamGrad& g,
                                double step, const FitOptions& options) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidConfig("finite-difference step must be positive");
    }
    const auto [beta, ctx] = solve_weighted_ls(points, n, options);
    const FitGradients analytic = backward_fit(ctx, g);

    FitOptions frozen = options;
    frozen.fixed_damping = ctx.damping();

    GradCheckReport report;
    const std::size_t m = points.size();
    report.entries.reserve(3 * m);

    auto probe = [&](InputKind kind, std::vector<double> WeightedPointSet::*field,
                     const std::vector<double>& grads) {
        for (std::size_t i = 0; i < m; ++i) {
            WeightedPointSet perturbed = points;
            const double theta = (points.*field)[i];
            const double h = step * std::max(1.0, std::abs(theta));
            (perturbed.*field)[i] = theta + h;
            const double plus = seeded_objective(perturbed, n, g, frozen);
            // The solver sees weights only through w^2, so L(-a) = L(a); probing at |w - h|
            // keeps the lower sample admissible when w < h.
            (perturbed.*field)[i] = kind == InputKind::weight ? std::abs(theta - h) : theta - h;
            const double minus = seeded_objective(perturbed, n, g, frozen);
            const double numeric = (plus - minus) / (2.0 * h);
            const double err = std::abs(grads[i] - numeric);
            report.entries.push_back({kind, i, grads[i], numeric, err / std::max(1e-12, std::abs(numeric)), err});
        }
    };
    probe(InputKind::weight, &WeightedPointSet::ws, analytic.d_w);
    probe(InputKind::y, &WeightedPointSet::ys, analytic.d_y);
    probe(InputKind::x, &WeightedPointSet::xs, analytic.d_x);
    return report;
}

}  // namespace dlsq
