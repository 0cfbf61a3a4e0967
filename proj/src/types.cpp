#include "dlsq/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dlsq/errors.hpp"

namespace dlsq {

void WeightedPointSet::validate() const {
    if (xs.empty()) {
        throw LengthMismatch("point set is empty");
    }
    if (ys.size() != xs.size() || ws.size() != xs.size()) {
        throw LengthMismatch("point set sequences differ in length: xs=" + std::to_string(xs.size()) +
                             " ys=" + std::to_string(ys.size()) + " ws=" + std::to_string(ws.size()));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw InvalidConfig("non-finite coordinate at index " + std::to_string(i));
        }
        if (!std::isfinite(ws[i]) || ws[i] < 0.0) {
            throw InvalidWeight("weight at index " + std::to_string(i) + " is negative or non-finite");
        }
    }
}

double CurveParams::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

double CurveParams::derivative(double x) const {
    double acc = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 1;) {
        acc = acc * x + static_cast<double>(j) * coeffs[j];
    }
    return acc;
}

CurveParams operator-(const CurveParams& a, const CurveParams& b) {
    CurveParams out;
    out.coeffs.assign(std::max(a.size(), b.size()), 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) out.coeffs[j] += a.coeffs[j];
    for (std::size_t j = 0; j < b.size(); ++j) out.coeffs[j] -= b.coeffs[j];
    return out;
}

double evaluate_curve(const CurveParams& params, double x) { return params(x); }

}  // namespace dlsq
