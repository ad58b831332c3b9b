#pragma once

#include <chirpqfi/error.hpp>

namespace chirpqfi {

/// Richardson-extrapolated central difference (4 D(h/2) - D(h)) / 3, where
/// D(s) = (f(x+s) - f(x-s)) / (2s). Truncation error is O(h^4).
template <class F>
auto central_derivative(F&& f, double x, double h) {
    if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
    const auto d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    const auto d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace chirpqfi
