#include "dlsq/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dlsq/autodiff_fit.hpp"
#include "dlsq/errors.hpp"
#include "dlsq/geo_loss.hpp"
#include "dlsq/linfit.hpp"
#include "dlsq/rng.hpp"

namespace dlsq::verify {

namespace {

using Matrix = std::vector<std::vector<double>>;

void normal_system(const WeightedPointSet& p, std::size_t n, Matrix& a, std::vector<double>& b) {
    a.assign(n, std::vector<double>(n, 0.0));
    b.assign(n, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double w2 = p.ws[i] * p.ws[i];
        for (std::size_t r = 0; r < n; ++r) {
            const double xr = std::pow(p.xs[i], static_cast<double>(r));
            for (std::size_t c = 0; c < n; ++c) a[r][c] += w2 * xr * std::pow(p.xs[i], static_cast<double>(c));
            b[r] += w2 * xr * p.ys[i];
        }
    }
}

WeightedPointSet random_instance(Rng& rng, std::size_t m) {
    WeightedPointSet p;
    for (std::size_t i = 0; i < m; ++i) {
        p.xs.push_back(rng.uniform(-1.0, 1.0));
        p.ys.push_back(rng.uniform(-1.0, 1.0));
        p.ws.push_back(rng.uniform(0.1, 1.0));
    }
    return p;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<double> reference_fit(const WeightedPointSet& points, std::size_t n) {
    Matrix a;
    std::vector<double> b;
    normal_system(points, n, a, b);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (a[piv][col] == 0.0) throw DegenerateSystem("reference system is singular");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

double normal_condition(const WeightedPointSet& points, std::size_t n) {
    Matrix a;
    std::vector<double> b;
    normal_system(points, n, a, b);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    double lo = INFINITY;
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, a[i][i]);
        hi = std::max(hi, a[i][i]);
    }
    return lo <= 0.0 ? INFINITY : hi / lo;
}

SuiteResult oracle_suite(std::size_t count, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult res{"oracle"};
    Rng rng(seed);
    while (res.cases < count) {
        const std::size_t n = 1 + rng.below(5);
        const std::size_t m = 2 * n + rng.below(51 - 2 * n);
        const WeightedPointSet p = random_instance(rng, m);
        if (normal_condition(p, n) > 1e6) continue;
        ++res.cases;
        const std::vector<double> ref = reference_fit(p, n);
        const CurveParams beta = solve_weighted_ls(p, n).first;
        double diff = 0.0;
        double norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            diff += (beta[j] - ref[j]) * (beta[j] - ref[j]);
            norm += ref[j] * ref[j];
        }
        const double rel = std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
        res.worst = std::max(res.worst, rel);
        if (!(rel <= 1e-8)) ++res.failures;
    }
    res.seconds = seconds_since(start);
    return res;
}

SuiteResult gradient_suite(std::size_t count, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult res{"grads"};
    Rng rng(seed);
    while (res.cases < count) {
        const std::size_t n = 1 + rng.below(4);
        const std::size_t m = 2 * n + rng.below(31 - 2 * n);
        const WeightedPointSet p = random_instance(rng, m);
        if (normal_condition(p, n) > 1e4) continue;
        std::vector<double> g(n);
        for (double& v : g) v = rng.uniform(-1.0, 1.0);
        ++res.cases;
        const GradCheckReport report = check_gradients(p, n, UpstreamGrad{g}, 1e-5);
        for (const auto& e : report.entries) {
            if (std::abs(e.analytic - e.numeric) > 1e-9) res.worst = std::max(res.worst, e.rel_error);
        }
        if (!report.passes(1e-5, 1e-9)) ++res.failures;
    }
    res.seconds = seconds_since(start);
    return res;
}

SuiteResult loss_suite(std::size_t count, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult res{"losses"};
    Rng rng(seed);
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t n = c % 2 == 0 ? 2 : 3;
        LossConfig cfg;
        cfg.t = rng.uniform(0.1, 5.0);
        CurveParams pred;
        CurveParams gt;
        for (std::size_t j = 0; j < n; ++j) {
            pred.coeffs.push_back(rng.uniform(-2.0, 2.0));
            gt.coeffs.push_back(rng.uniform(-2.0, 2.0));
        }
        auto closed = [&](const CurveParams& p) {
            return n == 2 ? geometric_loss_line(p, gt, cfg) : geometric_loss_parabola(p, gt, cfg);
        };
        ++res.cases;
        bool ok = true;
        const LossValue lv = closed(pred);
        const double quad = geometric_loss_numeric(pred, gt, cfg);
        const double value_err = std::abs(lv.value - quad) / std::max(1.0, std::abs(quad));
        res.worst = std::max(res.worst, value_err);
        ok = ok && value_err <= 1e-9;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(pred[j]));
            CurveParams up = pred;
            CurveParams dn = pred;
            up.coeffs[j] += h;
            dn.coeffs[j] -= h;
            const double fd = (closed(up).value - closed(dn).value) / (2.0 * h);
            const double abs_err = std::abs(fd - lv.grad[j]);
            const double rel = abs_err / std::max({std::abs(fd), std::abs(lv.grad[j]), 1e-300});
            if (abs_err > 1e-9) {
                res.worst = std::max(res.worst, rel);
                ok = ok && rel <= 1e-7;
            }
        }
        if (!ok) ++res.failures;
    }
    res.seconds = seconds_since(start);
    return res;
}

}  // namespace dlsq::verify
