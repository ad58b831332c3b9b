#pragma once

#include <chirpqfi/dynamics.hpp>
#include <chirpqfi/error.hpp>
#include <chirpqfi/numerics/special.hpp>
#include <chirpqfi/pulses.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace chirpqfi {

/// Dimensionless information Gamma^2 x (...) split into the loss-outcome part
/// and the part carried by the surviving single-photon wavepacket.
struct FisherBreakdown {
    double classical = 0.0;
    double quantum = 0.0;
    double total = 0.0;
    double p_loss = 0.0;
};

/// (dp)^2 / (p (1 - p)). Exact zero when dp = 0; at p in {0, 1} a derivative
/// above 1e-14 in magnitude is a DegenerateModel.
inline double classical_fi(const AmplitudePair& a) {
    if (!(a.p >= -1e-15 && a.p <= 1.0 + 1e-15)) throw Error(ErrorKind::InvalidArgument, "probability outside [0, 1]");
    if (a.dp == 0.0) return 0.0;
    if (a.p <= 0.0 || a.p >= 1.0) {
        if (std::abs(a.dp) <= 1e-14) return 0.0;
        throw Error(ErrorKind::DegenerateModel, "p is 0 or 1 but its derivative does not vanish");
    }
    return a.dp * a.dp / (a.p * (1.0 - a.p));
}

/// 4 <dpsi~|dpsi~> - 4 |<psi~|dpsi~>|^2 / (1 - p) for an unnormalized state of
/// squared norm `norm_weight` = 1 - p. Equals (1 - p) times the QFI of the
/// normalized state.
inline double pure_qfi(double d_norm_sq, cplx overlap, double norm_weight) {
    if (norm_weight < 1e-12) throw Error(ErrorKind::VacuumOnly, "no photon amplitude left in the pulse mode");
    const double q = 4.0 * d_norm_sq - 4.0 * std::norm(overlap) / norm_weight;
    return q < 0.0 && q > -1e-12 ? 0.0 : q;
}

inline double pure_qfi(const CVec& state, const CVec& derivative, const std::vector<double>& weights, double norm_weight) {
    if (state.size() != weights.size() || derivative.size() != weights.size())
        throw Error(ErrorKind::GridMismatch, "state, derivative and weights differ in length");
    return pure_qfi(norm_squared(weights, derivative), inner(weights, state, derivative), norm_weight);
}

inline FisherBreakdown make_breakdown(const AmplitudePair& loss, double d_norm_sq, cplx overlap) {
    FisherBreakdown b;
    b.p_loss = loss.p;
    b.classical = classical_fi(loss);
    b.quantum = pure_qfi(d_norm_sq, overlap, 1.0 - loss.p);
    b.total = b.classical + b.quantum;
    return b;
}

// ---------------------------------------------------------------------------
// Finite detection time

/// Breakdown at every grid node as a function of the detection time, O(N)
/// through cumulative inner products. Entry i is the detection time t_i.
inline std::vector<FisherBreakdown> finite_time_curve(const SampledPulse& pulse, const SystemParams& params,
                                                      const Trajectory& excited) {
    const std::size_t n = pulse.grid.size();
    const double sg = std::sqrt(params.coupling), dt = pulse.grid.dt();
    const auto loss = loss_probability(pulse, params, excited);
    const CVec q = detail::scattered_derivative_density(excited, params.coupling);
    std::vector<double> dd(n);
    CVec ov(n);
    for (std::size_t i = 0; i < n; ++i) {
        dd[i] = std::norm(q[i]);
        ov[i] = std::conj(pulse.values[i] + sg * excited.value[i]) * q[i];
    }
    const auto cdd = detail::cumulative_trapezoid(dd, dt, pulse.first);
    const auto cov = detail::cumulative_trapezoid(ov, dt, pulse.first);
    std::vector<FisherBreakdown> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = make_breakdown(loss.at(i), cdd[i], cov[i]);
    return out;
}

inline std::vector<FisherBreakdown> finite_time_curve(const SampledPulse& pulse, const SystemParams& params) {
    return finite_time_curve(pulse, params, excited_amplitude(pulse, params));
}

/// Breakdown for detection at grid node t_detect (NodeMismatch otherwise).
inline FisherBreakdown finite_time_qfi(const SampledPulse& pulse, const SystemParams& params, double t_detect) {
    const std::size_t k = pulse.grid.node_index(t_detect);
    const auto ex = excited_amplitude(pulse, params);
    const auto wp = outgoing_wavepacket(pulse, params, ex, t_detect);
    const auto loss = loss_probability(pulse, params, ex).at(k);
    return make_breakdown(loss, wp.d_norm_squared(), wp.overlap());
}

// ---------------------------------------------------------------------------
// Asymptotic time (frequency domain)

/// Frequency-domain integrals behind the asymptotic breakdown.
struct AsymptoticIntegrals {
    double p = 0.0;              ///< Gamma_perp int |xi~|^2 |f|^2
    double dp = 0.0;             ///< Gamma_perp int |xi~|^2 2 Re(f* df)
    double d_norm_sq = 0.0;      ///< <dpsi~|dpsi~>
    double overlap_im = 0.0;     ///< Im <psi~|dpsi~>
    double normalization = 0.0;  ///< Re <psi~|dpsi~> + dp/2, identically zero
    cplx overlap() const { return {normalization - 0.5 * dp, overlap_im}; }
};

/// The real part of the overlap is assembled from an integrand that combines
/// Re<psi~|dpsi~> with dp/2 pointwise; that combination vanishes identically
/// (derivative of |1 - sqrt(Gamma) f|^2 + Gamma_perp |f|^2 = 1), so the
/// normalization identity is not left to cancellation between two quadratures.
inline AsymptoticIntegrals asymptotic_integrals(const PulseSpectrum& sp, const SystemParams& s, double rel_tol = 1e-10) {
    s.validate();
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    // The last component is rounding noise around zero; every integral here
    // is bounded by a few units for a normalized pulse.
    opt.abs_tol = 1e-14;
    const double G = s.coupling, sg = std::sqrt(G), Gp = s.gamma_perp;
    const auto r = integrate_spectrum(
        sp,
        [&](double w, cplx xi) {
            const auto [f, df] = characteristic_function(s, w);
            const double rho = std::norm(xi);
            const cplx g = f + 2.0 * G * df;
            const cplx kern = -(1.0 - sg * std::conj(f)) * g / (2.0 * sg);
            const double fdf = std::real(std::conj(f) * df);
            return std::array<double, 5>{rho * Gp * std::norm(f), rho * Gp * 2.0 * fdf, rho * std::norm(g) / (4.0 * G),
                                         rho * kern.imag(), rho * (kern.real() + Gp * fdf)};
        },
        {s.detuning}, opt);
    return {r[0], r[1], r[2], r[3], r[4]};
}

inline FisherBreakdown asymptotic_qfi(const PulseSpectrum& sp, const SystemParams& s, double rel_tol = 1e-10) {
    if (sp.tabulated() && sp.edge_leakage())
        throw Error(ErrorKind::EdgeLeakage, "tabulated pulse has not decayed at the sampling window edge");
    const auto I = asymptotic_integrals(sp, s, rel_tol);
    return make_breakdown({I.p, I.dp}, I.d_norm_sq, I.overlap());
}

inline FisherBreakdown asymptotic_qfi(const PulseSpec& pulse, const SystemParams& s, double rel_tol = 1e-10) {
    return asymptotic_qfi(PulseSpectrum(pulse), s, rel_tol);
}

// ---------------------------------------------------------------------------
// Closed forms

/// Real Gaussian pulse at asymptotic time as a function of gamma = Gamma_perp/Gamma
/// and the spectral width sigma (units of Gamma). Every e^{z^2} erfc(z) factor
/// with z = (gamma+1)/(2 sqrt(2) sigma) is evaluated as scaled_erfc(z).
inline FisherBreakdown gaussian_closed_forms(double g, double s) {
    if (!(g >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be non-negative");
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
    if (s < 1e-3) throw Error(ErrorKind::Underflow, "sigma below 1e-3 is outside the scaled-erfc range");
    const double r2p = std::sqrt(2.0 * std::numbers::pi);
    const double g1 = g + 1.0;
    const double E = scaled_erfc(g1 / (2.0 * std::sqrt(2.0) * s));
    const double A = r2p * (4.0 * g * s * s + g1 * g1) * E - 4.0 * g1 * s;
    const double s2 = s * s, s4 = s2 * s2;

    FisherBreakdown b;
    b.p_loss = r2p * g * E / (g1 * s);
    const double lossy = r2p * g * E - g1 * s;  // = (p - 1) (g + 1) s
    b.classical = g == 0.0 ? 0.0 : -g * A * A / (16.0 * r2p * g1 * g1 * s4 * E * lossy);
    const double t1 = -g * g * A * A / (g * s - r2p * g * E + s);
    const double t2 = 8.0 * s2 *
                      (r2p * (4.0 * (2.0 * g * g1 + 1.0) * s2 + (2.0 * g + 1.0) * g1 * g1) * E -
                       4.0 * g1 * (2.0 * g + 1.0) * s);
    b.quantum = (t1 + t2) / (16.0 * g1 * g1 * g1 * s4 * s);
    b.total = b.classical + b.quantum;
    return b;
}

/// Exponential pulse with linear phase (equivalently detuning `delta`) at
/// asymptotic time; `duration` is Gamma*T. p_loss follows from the
/// convolution of the pulse and TLS Lorentzians.
inline FisherBreakdown exponential_linear_closed_forms(double g, double duration, double delta) {
    if (!(g >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be non-negative");
    if (!(duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be positive");
    const double T = duration, D = delta, g1 = g + 1.0;
    const double A = g * T + T + 1.0;
    const double L = 4.0 * D * D * T * T + A * A;

    FisherBreakdown b;
    {
        const double inner = 32.0 * D * D * T * T * (g + g1 * g1 * T) + 8.0 * (g + (g * g - 1.0) * T) * A * A;
        const double num = g * T * inner * inner;
        const double den = 16.0 * g1 * g1 * g1 * A * L * L * L * (1.0 - 4.0 * g * T * A / (g1 * L));
        b.classical = num / den;
    }
    {
        const double num = 8.0 * T *
                           (2.0 * g * g * g + 4.0 * g * g + 3.0 * g +
                            g1 * T * T *
                                (2.0 * g * g * g * g + 2.0 * g * g * g + g * g * (8.0 * D * D + 3.0) + 8.0 * g * D * D +
                                 4.0 * D * D + 1.0) +
                            (4.0 * g * g * g * g + 8.0 * g * g * g + 8.0 * g * g + 4.0 * g + 2.0) * T + 1.0);
        const double den = g1 * g1 * g1 * L * (g + g1 * T * T * (g * g - 2.0 * g + 4.0 * D * D + 1.0) + 2.0 * (g * g + 1.0) * T + 1.0);
        b.quantum = num / den;
    }
    const double a = 0.5 / T, c = 0.5 * g1;
    b.p_loss = g * (a + c) / (c * ((a + c) * (a + c) + D * D));
    b.total = b.classical + b.quantum;
    return b;
}

// ---------------------------------------------------------------------------
// Overlap of the normalized conditional state

struct OverlapReport {
    cplx overlap;    ///< <psi|dpsi> of the normalized pulse-mode state
    bool symmetric;  ///< |xi~|^2 symmetric about the TLS resonance
};

inline OverlapReport spectral_overlap(const PulseSpectrum& sp, const SystemParams& s, double rel_tol = 1e-10) {
    const auto I = asymptotic_integrals(sp, s, rel_tol);
    const double keep = 1.0 - I.p;
    if (keep < 1e-12) throw Error(ErrorKind::VacuumOnly, "no photon amplitude left in the pulse mode");
    OverlapReport r;
    r.overlap = cplx(I.normalization, I.overlap_im) / keep;
    // Tabulated spectra are evaluated pointwise at O(samples) each, so their
    // check uses a coarser grid over the bulk of the band.
    const double half = 12.0 * sp.scale() + std::abs(sp.center() - s.detuning) +
                        (sp.tabulated() ? std::min(200.0, max_phase_rate(sp.spec(), -9.0 * sp.spec().duration,
                                                                         9.0 * sp.spec().duration))
                                        : 0.0);
    r.symmetric = spectral_symmetry(sp, FrequencyGrid::symmetric(half, sp.tabulated() ? 401 : 2001), 1e-8, s.detuning);
    return r;
}

inline OverlapReport spectral_overlap(const PulseSpec& pulse, const SystemParams& s, double rel_tol = 1e-10) {
    return spectral_overlap(PulseSpectrum(pulse), s, rel_tol);
}

}  // namespace chirpqfi
