#pragma once

#include <cmath>

namespace chirpqfi {

/// e^{x^2} erfc(x).
///
/// Below x = 10 the product is formed directly; x^2 is split into a rounded
/// part and its exact fma residual so the large exponential does not amplify
/// the rounding of x*x. From x = 10 upward erfc underflows long before the
/// product does, so the Laplace continued fraction
///   sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
/// is summed with the modified Lentz algorithm. Negative arguments use
/// erfc(-x) = 2 - erfc(x).
inline double scaled_erfc(double x) {
    constexpr double inv_sqrt_pi = 0.56418958354775628695;
    if (std::isnan(x)) return x;
    if (x < 0.0) {
        const double hi = x * x;
        const double lo = std::fma(x, x, -hi);
        return 2.0 * std::exp(hi) * (1.0 + lo) - scaled_erfc(-x);
    }
    if (x < 10.0) {
        const double hi = x * x;
        const double lo = std::fma(x, x, -hi);
        return std::exp(hi) * (1.0 + lo) * std::erfc(x);
    }
    if (std::isinf(x)) return 0.0;
    constexpr double tiny = 1e-300;
    double f = x, c = x, d = 0.0;
    for (int n = 1; n < 500; ++n) {
        const double a = 0.5 * n;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return inv_sqrt_pi / f;
}

}  // namespace chirpqfi
