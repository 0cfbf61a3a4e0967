#pragma once

#include <cstddef>
#include <vector>

namespace dlsq {

/// Flattened list of (x, y, w) triplets fed to the fitting module.
struct WeightedPointSet {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ws;

    std::size_t size() const noexcept { return xs.size(); }

    /// Throws LengthMismatch on unequal or empty sequences, InvalidWeight on
    /// negative or non-finite weights and InvalidConfig on non-finite coordinates.
    void validate() const;
};

/// Polynomial coefficients, constant term first.
struct CurveParams {
    std::vector<double> coeffs;

    std::size_t size() const noexcept { return coeffs.size(); }
    double operator[](std::size_t i) const { return coeffs[i]; }

    /// Horner evaluation of sum_j coeffs[j] * x^j.
    double operator()(double x) const;
    /// Derivative d/dx of the polynomial at x.
    double derivative(double x) const;
};

/// Coefficient-wise difference; the shorter operand is zero-padded.
CurveParams operator-(const CurveParams& a, const CurveParams& b);

double evaluate_curve(const CurveParams& params, double x);

}  // namespace dlsq
