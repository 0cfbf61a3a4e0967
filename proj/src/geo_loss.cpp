#include "dlsq/geo_loss.hpp"

#include <cmath>
#include <string>

#include "dlsq/errors.hpp"
#include "dlsq/quadrature.hpp"

namespace dlsq {

void LossConfig::validate() const {
    if (!std::isfinite(t) || t <= 0.0) {
        throw InvalidConfig("loss horizon t must be finite and positive");
    }
    if (quad_segments < 2 || quad_segments % 2 != 0) {
        throw InvalidConfig("quad_segments must be even and >= 2, got " + std::to_string(quad_segments));
    }
}

namespace {

void require_same_length(const CurveParams& pred, const CurveParams& gt) {
    if (pred.size() != gt.size()) {
        throw LengthMismatch("curve lengths differ: " + std::to_string(pred.size()) + " vs " +
                             std::to_string(gt.size()));
    }
}

// Coefficient differences padded to `n` entries.
std::vector<double> padded_delta(const CurveParams& pred, const CurveParams& gt, std::size_t n,
                                 const char* shape) {
    require_same_length(pred, gt);
    if (pred.size() == 0 || pred.size() > n) {
        throw LengthMismatch(std::string(shape) + " loss expects at most " + std::to_string(n) +
                             " coefficients, got " + std::to_string(pred.size()));
    }
    std::vector<double> d(n, 0.0);
    for (std::size_t j = 0; j < pred.size(); ++j) d[j] = pred[j] - gt[j];
    return d;
}

}  // namespace

LossValue l2_param_loss(const CurveParams& pred, const CurveParams& gt) {
    require_same_length(pred, gt);
    if (pred.size() == 0) throw LengthMismatch("empty coefficient vectors");
    const double n = static_cast<double>(pred.size());
    LossValue out;
    out.grad.resize(pred.size());
    for (std::size_t j = 0; j < pred.size(); ++j) {
        const double d = pred[j] - gt[j];
        out.value += d * d;
        out.grad[j] = 2.0 / n * d;
    }
    out.value /= n;
    return out;
}

LossValue geometric_loss_line(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg) {
    cfg.validate();
    const auto d = padded_delta(pred, gt, 2, "line");
    const double t = cfg.t;
    const double t2 = t * t;
    const double t3 = t2 * t;

    LossValue out;
    out.value = d[0] * d[0] * t + d[1] * d[0] * t2 + d[1] * d[1] * t3 / 3.0;
    const double g0 = 2.0 * d[0] * t + d[1] * t2;
    const double g1 = d[0] * t2 + 2.0 * d[1] * t3 / 3.0;
    out.grad = {g0, g1};
    out.grad.resize(pred.size());
    return out;
}

LossValue geometric_loss_parabola(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg) {
    cfg.validate();
    const auto d = padded_delta(pred, gt, 3, "parabola");
    const double t = cfg.t;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    const double t5 = t4 * t;

    LossValue out;
    out.value = d[2] * d[2] * t5 / 5.0 + 2.0 * d[2] * d[1] * t4 / 4.0 +
                (d[1] * d[1] + 2.0 * d[2] * d[0]) * t3 / 3.0 + 2.0 * d[1] * d[0] * t2 / 2.0 + d[0] * d[0] * t;
    const double g0 = 2.0 * d[2] * t3 / 3.0 + d[1] * t2 + 2.0 * d[0] * t;
    const double g1 = d[2] * t4 / 2.0 + 2.0 * d[1] * t3 / 3.0 + d[0] * t2;
    const double g2 = 2.0 * d[2] * t5 / 5.0 + d[1] * t4 / 2.0 + 2.0 * d[0] * t3 / 3.0;
    out.grad = {g0, g1, g2};
    out.grad.resize(pred.size());
    return out;
}

double geometric_loss_numeric(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg) {
    cfg.validate();
    require_same_length(pred, gt);
    const CurveParams delta = pred - gt;
    return simpson(
        [&](double x) {
            const double d = delta(x);
            return d * d;
        },
        0.0, cfg.t, cfg.quad_segments);
}

double area_error(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg) {
    cfg.validate();
    require_same_length(pred, gt);
    const CurveParams delta = pred - gt;
    return simpson([&](double x) { return std::abs(delta(x)); }, 0.0, cfg.t, cfg.quad_segments) / cfg.t;
}

}  // namespace dlsq
