#pragma once

#include <chirpqfi/error.hpp>
#include <chirpqfi/numerics/grid.hpp>

#include <array>
#include <cmath>
#include <cstddef>

namespace chirpqfi {

/// Complex samples on a grid together with their derivative with respect to
/// the estimated parameter. Nodes before `first` are identically zero.
struct Trajectory {
    Grid grid;
    CVec value;
    CVec d_value;
    std::size_t first = 0;
};

enum class DriveInterpolation {
    Linear,       ///< drive linear between nodes, global error O(dt^2)
    CubicHermite  ///< drive cubic from node values and time-derivatives, O(dt^4)
};

/// Drive samples on a grid. `time_derivative` is required only for
/// cubic-Hermite interpolation.
struct DriveSamples {
    CVec value;
    CVec time_derivative;
};

/// dpsi/dt = -rate psi + drive(t), together with its parameter sensitivity
/// dchi/dt = -rate chi - d_rate psi + d_drive(t).
struct SensitivitySystem {
    cplx rate;
    cplx d_rate = 0.0;
    DriveSamples drive;
    DriveSamples d_drive;
};

namespace detail {

// m_k(x) = int_0^1 s^k e^{-x s} ds for k = 0..4.
inline std::array<cplx, 5> decay_moments(cplx x) {
    std::array<cplx, 5> m{};
    if (std::abs(x) < 2.0) {
        cplx term = 1.0;  // (-x)^n / n!
        for (int n = 0; n < 80; ++n) {
            for (int k = 0; k < 5; ++k) m[k] += term / static_cast<double>(n + k + 1);
            term *= -x / static_cast<double>(n + 1);
            if (std::abs(term) < 1e-18) break;
        }
        return m;
    }
    const cplx e = std::exp(-x);
    m[0] = (1.0 - e) / x;
    for (int k = 1; k < 5; ++k) m[k] = (static_cast<double>(k) * m[k - 1] - e) / x;
    return m;
}

}  // namespace detail

/// Exact exponential integration of the augmented (value, sensitivity) system.
///
/// Over a step of length h the drive is replaced by a polynomial q(s) in the
/// backward variable s = t_{i+1} - t, and the variation-of-constants integral
/// int_0^h e^{-rate s} (I + N s) q(s) ds is evaluated exactly through the
/// moments h^{k+1} m_k(rate h). N is the nilpotent coupling of the
/// sensitivity row, so the sensitivity is the exact parameter derivative of
/// the discrete value recursion. Integration starts at node `first` with zero
/// state; drive values at `first` are taken as right limits.
inline Trajectory evolve_with_sensitivity(const Grid& grid, const SensitivitySystem& sys,
                                          DriveInterpolation interp = DriveInterpolation::Linear,
                                          std::size_t first = 0) {
    const std::size_t n = grid.size();
    const bool hermite = interp == DriveInterpolation::CubicHermite;
    auto check = [&](const CVec& v, bool needed) {
        if (needed && v.size() != n) throw Error(ErrorKind::GridMismatch, "drive sample count differs from grid");
    };
    check(sys.drive.value, true);
    check(sys.d_drive.value, true);
    check(sys.drive.time_derivative, hermite);
    check(sys.d_drive.time_derivative, hermite);
    if (sys.rate.real() < 0.0) throw Error(ErrorKind::InvalidArgument, "decay rate must have Re >= 0");
    if (first >= n) throw Error(ErrorKind::InvalidArgument, "start node outside grid");

    Trajectory out{grid, CVec(n, 0.0), CVec(n, 0.0), first};
    const double h = grid.dt();
    const cplx E = std::exp(-sys.rate * h);
    const auto m = detail::decay_moments(sys.rate * h);
    const cplx dr = sys.d_rate;

    cplx psi = 0.0, chi = 0.0;
    for (std::size_t i = first; i + 1 < n; ++i) {
        // Scaled coefficients a_k = c_k h^k of q(s) = sum c_k s^k.
        std::array<cplx, 4> ab{}, ac{};
        const cplx b0 = sys.drive.value[i], b1 = sys.drive.value[i + 1];
        const cplx g0 = sys.d_drive.value[i], g1 = sys.d_drive.value[i + 1];
        if (hermite) {
            auto fill = [h](std::array<cplx, 4>& a, cplx v0, cplx v1, cplx s0, cplx s1) {
                const cplx A = v0 - v1 + s1 * h;
                const cplx Bh = (s1 - s0) * h;
                a = {v1, -s1 * h, 3.0 * A - Bh, Bh - 2.0 * A};
            };
            fill(ab, b0, b1, sys.drive.time_derivative[i], sys.drive.time_derivative[i + 1]);
            fill(ac, g0, g1, sys.d_drive.time_derivative[i], sys.d_drive.time_derivative[i + 1]);
        } else {
            ab = {b1, b0 - b1, 0.0, 0.0};
            ac = {g1, g0 - g1, 0.0, 0.0};
        }
        cplx ip = 0.0, ic = 0.0, in = 0.0;
        for (int k = 0; k < 4; ++k) {
            ip += ab[k] * m[k];
            ic += ac[k] * m[k];
            in += ab[k] * m[k + 1];
        }
        const cplx next_chi = E * (chi - dr * h * psi) + h * ic - dr * h * h * in;
        psi = E * psi + h * ip;
        chi = next_chi;
        out.value[i + 1] = psi;
        out.d_value[i + 1] = chi;
    }
    return out;
}

/// Solves dpsi/dt = -rate psi + drive(t), psi(t_start) = 0, with the drive
/// piecewise linear between nodes. The returned d_value channel is zero.
inline Trajectory evolve_driven_decay(cplx rate, const CVec& drive, const Grid& grid) {
    if (drive.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "drive sample count differs from grid");
    SensitivitySystem sys{rate, 0.0, {drive, {}}, {CVec(grid.size(), 0.0), {}}};
    return evolve_with_sensitivity(grid, sys, DriveInterpolation::Linear, 0);
}

}  // namespace chirpqfi
