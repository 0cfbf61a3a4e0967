#pragma once

#include <cstddef>
#include <vector>

#include "dlsq/types.hpp"

namespace dlsq {

struct LossConfig {
    /// Integration horizon; curves are compared over [0, t].
    double t = 1.0;
    /// Composite Simpson segments for the numeric loss and the area metric.
    std::size_t quad_segments = 1000;

    /// Throws InvalidConfig unless t is finite and positive and quad_segments is even and >= 2.
    void validate() const;
};

/// Loss value with its gradient with respect to the predicted coefficients.
struct LossValue {
    double value = 0.0;
    std::vector<double> grad;
};

/// Mean squared error over the coefficients.
LossValue l2_param_loss(const CurveParams& pred, const CurveParams& gt);

/// Squared area between two lines over [0, t], in closed form.
LossValue geometric_loss_line(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg);

/// Squared area between two parabolas over [0, t], in closed form.
LossValue geometric_loss_parabola(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg);

/// Simpson approximation of the squared area for curves of any degree.
double geometric_loss_numeric(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg);

/// Mean absolute lateral deviation (1/t) * integral_0^t |y(x) - y_hat(x)| dx.
double area_error(const CurveParams& pred, const CurveParams& gt, const LossConfig& cfg);

}  // namespace dlsq
