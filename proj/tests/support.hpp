#pragma once

#include <chirpqfi/error.hpp>

#include <algorithm>
#include <cmath>

namespace support {

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

template <class F>
chirpqfi::ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const chirpqfi::Error& e) {
        return e.kind();
    }
    throw std::runtime_error("expected a chirpqfi::Error");
}

}  // namespace support
