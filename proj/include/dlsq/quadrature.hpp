#pragma once

#include <cstddef>

namespace dlsq {

/// Composite Simpson rule over [a, b] with an even number of segments.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t segments) {
    const double h = (b - a) / static_cast<double>(segments);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t k = 1; k < segments; ++k) {
        const double v = f(a + static_cast<double>(k) * h);
        if (k % 2 == 1) {
            odd += v;
        } else {
            even += v;
        }
    }
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

}  // namespace dlsq
