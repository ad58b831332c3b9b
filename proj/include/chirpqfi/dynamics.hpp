#pragma once

#include <chirpqfi/error.hpp>
#include <chirpqfi/numerics/grid.hpp>
#include <chirpqfi/numerics/integrator.hpp>
#include <chirpqfi/numerics/quadrature.hpp>
#include <chirpqfi/pulses.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

namespace chirpqfi {

/// TLS couplings in absolute units. Derivatives are taken with respect to
/// `coupling` (Gamma) with `gamma_perp` and `detuning` held fixed.
struct SystemParams {
    double coupling = 1.0;    ///< Gamma
    double gamma_perp = 0.0;  ///< Gamma_perp
    double detuning = 0.0;    ///< Delta

    /// Gamma = 1, Gamma_perp = gamma, Delta = delta.
    static SystemParams dimensionless(double gamma, double delta = 0.0) { return {1.0, gamma, delta}; }

    double gamma_ratio() const noexcept { return gamma_perp / coupling; }
    SystemParams with_coupling(double g) const {
        SystemParams s = *this;
        s.coupling = g;
        return s;
    }
    /// (Gamma + Gamma_perp)/2 + i Delta
    cplx rate() const noexcept { return {0.5 * (coupling + gamma_perp), detuning}; }

    void validate() const {
        if (!(coupling > 0.0) || !std::isfinite(coupling))
            throw Error(ErrorKind::InvalidArgument, "coupling must be positive");
        if (!(gamma_perp >= 0.0) || !std::isfinite(gamma_perp))
            throw Error(ErrorKind::InvalidArgument, "environment coupling must be non-negative");
        if (!std::isfinite(detuning)) throw Error(ErrorKind::InvalidArgument, "detuning must be finite");
    }
};

/// Loss probability and its Gamma-derivative.
struct AmplitudePair {
    double p = 0.0;
    double dp = 0.0;
};

/// psi_e(t) = -sqrt(Gamma) int e^{-rate (t - t')} xi(t') dt' and its Gamma-derivative.
inline Trajectory excited_amplitude(const SampledPulse& pulse, const SystemParams& params,
                                    DriveInterpolation interp = DriveInterpolation::CubicHermite) {
    params.validate();
    const double sg = std::sqrt(params.coupling);
    const std::size_t n = pulse.grid.size();
    SensitivitySystem sys;
    sys.rate = params.rate();
    sys.d_rate = 0.5;
    sys.drive.value.resize(n);
    sys.d_drive.value.resize(n);
    const bool hermite = interp == DriveInterpolation::CubicHermite;
    if (hermite) {
        sys.drive.time_derivative.resize(n);
        sys.d_drive.time_derivative.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        sys.drive.value[i] = -sg * pulse.values[i];
        sys.d_drive.value[i] = -pulse.values[i] / (2.0 * sg);
        if (hermite) {
            sys.drive.time_derivative[i] = -sg * pulse.time_derivative[i];
            sys.d_drive.time_derivative[i] = -pulse.time_derivative[i] / (2.0 * sg);
        }
    }
    return evolve_with_sensitivity(pulse.grid, sys, interp, pulse.first);
}

namespace detail {

// Cumulative trapezoid from node `first`: c[i] = int_{t_first}^{t_i} f.
template <class T>
std::vector<T> cumulative_trapezoid(const std::vector<T>& f, double dt, std::size_t first) {
    std::vector<T> c(f.size(), T{});
    for (std::size_t i = first + 1; i < f.size(); ++i) c[i] = c[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
    return c;
}

inline CVec scattered_derivative_density(const Trajectory& ex, double coupling) {
    const double sg = std::sqrt(coupling);
    CVec q(ex.value.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = ex.value[i] / (2.0 * sg) + sg * ex.d_value[i];
    return q;
}

}  // namespace detail

/// p(t) = |psi_e(t)|^2 + Gamma_perp int^t |psi_e|^2 and dp/dGamma at every node.
struct LossCurve {
    std::vector<double> p;
    std::vector<double> dp;
    AmplitudePair at(std::size_t i) const { return {p.at(i), dp.at(i)}; }
};

inline LossCurve loss_probability(const SampledPulse& pulse, const SystemParams& params, const Trajectory& excited) {
    if (!excited.grid.same_as(pulse.grid)) throw Error(ErrorKind::GridMismatch, "trajectory grid differs from pulse grid");
    const std::size_t n = excited.value.size();
    std::vector<double> a(n), da(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::norm(excited.value[i]);
        da[i] = 2.0 * std::real(std::conj(excited.value[i]) * excited.d_value[i]);
    }
    const auto ca = detail::cumulative_trapezoid(a, excited.grid.dt(), excited.first);
    const auto cda = detail::cumulative_trapezoid(da, excited.grid.dt(), excited.first);
    LossCurve out{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.p[i] = a[i] + params.gamma_perp * ca[i];
        out.dp[i] = da[i] + params.gamma_perp * cda[i];
    }
    return out;
}

/// Outgoing pulse-mode amplitude psi~(t, tau) = xi(tau) + sqrt(Gamma) Theta(t - tau) psi_e(tau)
/// sampled over tau, with its Gamma-derivative Theta(t - tau) (psi_e/(2 sqrt(Gamma)) + sqrt(Gamma) dpsi_e).
///
/// For an interior detection node the amplitude jumps there, so that node is
/// stored twice (left and right limit), each with half a trapezoid weight.
/// `lift` maps grid samples onto this node list.
struct Wavepacket {
    Grid grid;
    std::size_t first = 0;
    std::size_t detect_index = 0;
    bool split = false;
    std::vector<double> weights;
    CVec value;
    CVec d_value;

    double t_detect() const { return grid.t(detect_index); }

    CVec lift(const CVec& grid_samples) const {
        if (grid_samples.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "sample count differs from grid");
        if (!split) return grid_samples;
        CVec out;
        out.reserve(grid_samples.size() + 1);
        out.insert(out.end(), grid_samples.begin(), grid_samples.begin() + static_cast<std::ptrdiff_t>(detect_index) + 1);
        out.insert(out.end(), grid_samples.begin() + static_cast<std::ptrdiff_t>(detect_index), grid_samples.end());
        return out;
    }

    double norm_squared() const { return chirpqfi::norm_squared(weights, value); }
    double d_norm_squared() const { return chirpqfi::norm_squared(weights, d_value); }
    cplx overlap() const { return inner(weights, value, d_value); }
};

inline Wavepacket outgoing_wavepacket(const SampledPulse& pulse, const SystemParams& params, const Trajectory& excited,
                                      double t_detect) {
    if (!excited.grid.same_as(pulse.grid)) throw Error(ErrorKind::GridMismatch, "trajectory grid differs from pulse grid");
    const Grid& g = pulse.grid;
    const std::size_t n = g.size();
    const std::size_t k = g.node_index(t_detect);
    const double sg = std::sqrt(params.coupling);
    const CVec q = detail::scattered_derivative_density(excited, params.coupling);

    Wavepacket wp{g, pulse.first, k, k + 1 < n && k > pulse.first, {}, {}, {}};
    const auto w = trapezoid_weights(g, pulse.first);
    for (std::size_t i = 0; i < n; ++i) {
        const bool scattered = i <= k;
        const cplx v = pulse.values[i] + (scattered ? sg * excited.value[i] : cplx(0.0));
        const cplx dv = scattered ? q[i] : cplx(0.0);
        if (wp.split && i == k) {
            wp.weights.push_back(0.5 * g.dt());
            wp.value.push_back(v);
            wp.d_value.push_back(dv);
            wp.weights.push_back(0.5 * g.dt());
            wp.value.push_back(pulse.values[i]);
            wp.d_value.push_back(0.0);
            continue;
        }
        wp.weights.push_back(w[i]);
        wp.value.push_back(v);
        wp.d_value.push_back(dv);
    }
    return wp;
}

/// Norm budget at every node: |psi_e(t)|^2 + ||psi~_P(t)||^2 + ||psi~_E(t)||^2,
/// which equals 1 for exact dynamics. O(N) through cumulative sums.
inline std::vector<double> norm_budget(const SampledPulse& pulse, const SystemParams& params, const Trajectory& excited) {
    const std::size_t n = pulse.grid.size();
    const double dt = pulse.grid.dt(), sg = std::sqrt(params.coupling);
    std::vector<double> scattered(n), incoming(n), excited_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        scattered[i] = std::norm(pulse.values[i] + sg * excited.value[i]);
        incoming[i] = std::norm(pulse.values[i]);
        excited_sq[i] = std::norm(excited.value[i]);
    }
    const auto cs = detail::cumulative_trapezoid(scattered, dt, pulse.first);
    const auto ci = detail::cumulative_trapezoid(incoming, dt, pulse.first);
    const auto ce = detail::cumulative_trapezoid(excited_sq, dt, pulse.first);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p_channel = cs[i] + (ci.back() - ci[i]);
        out[i] = excited_sq[i] + p_channel + params.gamma_perp * ce[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frequency domain (asymptotic time)

struct CharacteristicValue {
    cplx f;
    cplx df;  ///< d f / d Gamma at fixed Gamma_perp and Delta
};

/// f(w) = sqrt(Gamma) / ((Gamma + Gamma_perp)/2 - i (w - Delta)).
inline CharacteristicValue characteristic_function(const SystemParams& s, double w) {
    const double sg = std::sqrt(s.coupling);
    const cplx D(0.5 * (s.coupling + s.gamma_perp), -(w - s.detuning));
    return {sg / D, 1.0 / (2.0 * sg * D) - sg / (2.0 * D * D)};
}

/// Asymptotic pulse (P) and environment (E) amplitudes at one frequency.
struct ChannelAmplitudes {
    cplx p, dp;
    cplx e, de;
};

inline ChannelAmplitudes asymptotic_amplitudes(cplx xi, const SystemParams& s, double w) {
    const auto [f, df] = characteristic_function(s, w);
    const double sg = std::sqrt(s.coupling), sp = std::sqrt(s.gamma_perp);
    return {xi * (1.0 - sg * f), -xi * (f / (2.0 * sg) + sg * df), -sp * xi * f, -sp * xi * df};
}

struct ChannelNorms {
    double pulse_channel;
    double environment_channel;
};

inline ChannelNorms asymptotic_channel_norms(const PulseSpectrum& sp, const SystemParams& s, double rel_tol = 1e-10) {
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    const auto r = integrate_spectrum(
        sp,
        [&](double w, cplx xi) {
            const auto a = asymptotic_amplitudes(xi, s, w);
            return std::array<double, 2>{std::norm(a.p), std::norm(a.e)};
        },
        {s.detuning}, opt);
    return {r[0], r[1]};
}

}  // namespace chirpqfi
