#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dlsq/types.hpp"

namespace dlsq::verify {

/// Outcome of one randomized verification sweep.
struct SuiteResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    /// Largest error metric seen (suite-specific, relative).
    double worst = 0.0;
    double seconds = 0.0;
    bool passed() const noexcept { return cases > 0 && failures == 0; }
};

/// Gaussian elimination with partial pivoting on the explicitly formed
/// weighted normal equations; shares no code with the Cholesky path.
std::vector<double> reference_fit(const WeightedPointSet& points, std::size_t n);

/// 2-norm condition number of X^T W^2 X (Jacobi eigenvalues).
double normal_condition(const WeightedPointSet& points, std::size_t n);

/// solve_weighted_ls against reference_fit: m <= 50, n <= 5, x in [-1, 1],
/// cond <= 1e6, relative error <= 1e-8.
SuiteResult oracle_suite(std::size_t count = 1000, std::uint64_t seed = 1);

/// check_gradients on random instances: n <= 4, m in [2n, 30], x in [-1, 1],
/// cond <= 1e4; relative 1e-5 with a 1e-9 absolute floor.
SuiteResult gradient_suite(std::size_t count = 500, std::uint64_t seed = 1);

/// Closed-form line and parabola losses against Simpson(1000), within
/// 1e-9 * max(1, L), and their gradients against central differences within 1e-7.
SuiteResult loss_suite(std::size_t count = 1000, std::uint64_t seed = 1);

}  // namespace dlsq::verify
