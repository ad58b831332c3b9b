#pragma once

#include <chirpqfi/dynamics.hpp>
#include <chirpqfi/error.hpp>
#include <chirpqfi/fisher.hpp>
#include <chirpqfi/numerics/grid.hpp>
#include <chirpqfi/pulses.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace chirpqfi {

enum class BasisKind { GramSchmidtFromEnvelope, HermiteGauss };

inline const char* basis_name(BasisKind k) {
    return k == BasisKind::HermiteGauss ? "hermite_gauss" : "envelope";
}

/// Orthonormal temporal modes g_0..g_J sampled on a grid (trapezoid inner
/// product from node `first`).
struct ModeBasis {
    Grid grid;
    std::size_t first = 0;
    BasisKind kind = BasisKind::HermiteGauss;
    std::vector<CVec> functions;
    double gram_defect = 0.0;  ///< max |<g_i|g_j> - delta_ij|

    std::size_t size() const noexcept { return functions.size(); }
    std::vector<double> weights() const { return trapezoid_weights(grid, first); }
};

inline double gram_defect(const std::vector<CVec>& fs, const std::vector<double>& w) {
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            worst = std::max(worst, std::abs(inner(w, fs[i], fs[j]) - (i == j ? 1.0 : 0.0)));
    return worst;
}

/// Hermite-Gauss modes g_n(t) = h_n(t / (sqrt(2) T)) / (2 T^2)^{1/4}, h_n the
/// orthonormal Hermite functions; g_0 is the Gaussian envelope of duration T.
inline ModeBasis hermite_gauss_basis(double duration, int J, const Grid& grid) {
    if (J < 0) throw Error(ErrorKind::InvalidArgument, "J must be non-negative");
    if (!(duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be positive");
    const double T = duration;
    // Node spacing of h_J near the origin is about pi / sqrt(2J + 1) in x.
    const double spacing = std::numbers::sqrt2 * T * std::numbers::pi / std::sqrt(2.0 * J + 1.0);
    if (grid.dt() > spacing / 10.0)
        throw Error(ErrorKind::GridTooNarrow, "grid too coarse for the highest Hermite-Gauss mode");

    ModeBasis b{grid, 0, BasisKind::HermiteGauss, std::vector<CVec>(J + 1, CVec(grid.size())), 0.0};
    const double scale = std::pow(2.0 * T * T, -0.25);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.t(i) / (std::numbers::sqrt2 * T);
        double hm = 0.0, h = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
        b.functions[0][i] = scale * h;
        for (int n = 0; n < J; ++n) {
            const double next = std::sqrt(2.0 / (n + 1)) * x * h - std::sqrt(static_cast<double>(n) / (n + 1)) * hm;
            hm = h;
            h = next;
            b.functions[n + 1][i] = scale * h;
        }
    }
    b.gram_defect = gram_defect(b.functions, b.weights());
    if (b.gram_defect > 1e-8)
        throw Error(ErrorKind::GridTooNarrow, "Hermite-Gauss modes are truncated by the grid window");
    return b;
}

/// Modes seeded by the incoming pulse: g_0 = xi / ||xi||, and each further
/// candidate is (t / T) g_n, orthogonalized against all previous modes with
/// two Gram-Schmidt passes. The result spans {p(t) xi(t) : deg p <= J}.
inline ModeBasis envelope_basis(const SampledPulse& seed, int J) {
    if (J < 0) throw Error(ErrorKind::InvalidArgument, "J must be non-negative");
    const auto w = seed.weights();
    const double T = seed.spec.duration;
    ModeBasis b{seed.grid, seed.first, BasisKind::GramSchmidtFromEnvelope, {}, 0.0};
    auto normalize = [&](CVec& v) {
        const double nrm = std::sqrt(norm_squared(w, v));
        for (auto& x : v) x /= nrm;
        return nrm;
    };
    CVec g0 = seed.values;
    if (normalize(g0) < 1e-10) throw Error(ErrorKind::DegenerateSeed, "seed pulse has zero norm");
    b.functions.push_back(std::move(g0));
    for (int n = 0; n < J; ++n) {
        CVec v(seed.grid.size(), 0.0);
        for (std::size_t i = seed.first; i < v.size(); ++i) v[i] = (seed.grid.t(i) / T) * b.functions.back()[i];
        const double before = std::sqrt(norm_squared(w, v));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& g : b.functions) {
                const cplx c = inner(w, g, v);
                for (std::size_t i = seed.first; i < v.size(); ++i) v[i] -= c * g[i];
            }
        if (std::sqrt(norm_squared(w, v)) < 1e-10 * before)
            throw Error(ErrorKind::DegenerateSeed, "Gram-Schmidt pivot vanished");
        normalize(v);
        b.functions.push_back(std::move(v));
    }
    b.gram_defect = gram_defect(b.functions, w);
    return b;
}

/// HermiteGauss uses the duration of `pulse`; the envelope kind is seeded by
/// the pulse samples themselves.
inline ModeBasis build_basis(BasisKind kind, int J, const SampledPulse& pulse) {
    return kind == BasisKind::HermiteGauss ? hermite_gauss_basis(pulse.spec.duration, J, pulse.grid)
                                           : envelope_basis(pulse, J);
}

// ---------------------------------------------------------------------------
// Projections and outcome statistics

/// Modal amplitudes b_j = <g_j|psi~>, d_j = <g_j|dpsi~> of the outgoing
/// wavepacket, together with the wavepacket itself. `loss` is the vacuum
/// outcome of the discrete model, p = 1 - ||psi~||^2 and dp = -2 Re<psi~|dpsi~>,
/// so that every outcome distribution built from this set sums to one.
struct ModalSet {
    CVec b;
    CVec d;
    AmplitudePair loss;
    double norm_sq = 0.0;    ///< ||psi~||^2
    double d_norm_sq = 0.0;  ///< ||dpsi~||^2
    cplx overlap;            ///< <psi~|dpsi~>
    Wavepacket packet;

    /// Breakdown of the discrete model (the reference for every CFI ratio).
    FisherBreakdown breakdown() const { return make_breakdown(loss, d_norm_sq, overlap); }
    /// <psi|dpsi> of the normalized conditional state.
    cplx normalized_overlap() const { return (overlap + 0.5 * loss.dp) / (1.0 - loss.p); }
    /// QFI of the normalized conditional state.
    double conditional_qfi() const { return breakdown().quantum / (1.0 - loss.p); }
};

inline ModalSet project_amplitudes(const Wavepacket& packet, const ModeBasis& basis) {
    if (!packet.grid.same_as(basis.grid)) throw Error(ErrorKind::GridMismatch, "basis and wavepacket grids differ");
    ModalSet m{{}, {}, {}, 0.0, 0.0, {}, packet};
    m.norm_sq = packet.norm_squared();
    m.d_norm_sq = packet.d_norm_squared();
    m.overlap = packet.overlap();
    m.loss = {1.0 - m.norm_sq, -2.0 * m.overlap.real()};
    for (const auto& g : basis.functions) {
        const CVec lg = packet.lift(g);
        m.b.push_back(inner(packet.weights, lg, packet.value));
        m.d.push_back(inner(packet.weights, lg, packet.d_value));
    }
    return m;
}

/// Outcome probabilities with their Gamma-derivatives. Order: vacuum, modes
/// 0..J, remainder.
struct OutcomeDistribution {
    std::vector<double> p;
    std::vector<double> dp;
};

inline OutcomeDistribution outcome_distribution(const ModalSet& m, int J) {
    if (J < 0 || static_cast<std::size_t>(J) >= m.b.size())
        throw Error(ErrorKind::InvalidArgument, "truncation exceeds the number of projected modes");
    OutcomeDistribution o;
    o.p.push_back(m.loss.p);
    o.dp.push_back(m.loss.dp);
    double sp = 0.0, sdp = 0.0;
    for (int j = 0; j <= J; ++j) {
        const double pj = std::norm(m.b[j]);
        const double dpj = 2.0 * std::real(std::conj(m.b[j]) * m.d[j]);
        o.p.push_back(pj);
        o.dp.push_back(dpj);
        sp += pj;
        sdp += dpj;
    }
    o.p.push_back(m.norm_sq - sp);
    o.dp.push_back(2.0 * m.overlap.real() - sdp);
    return o;
}

/// sum_j (dp_j)^2 / p_j. Outcomes with p < 1e-14 contribute zero when
/// |dp| < 1e-12 and raise SingularOutcome otherwise.
inline double mode_cfi(const OutcomeDistribution& o) {
    double c = 0.0;
    for (std::size_t j = 0; j < o.p.size(); ++j) {
        if (o.p[j] < 1e-14) {
            if (std::abs(o.dp[j]) < 1e-12) continue;
            throw Error(ErrorKind::SingularOutcome, "outcome " + std::to_string(j) + " has p ~ 0 but dp != 0");
        }
        c += o.dp[j] * o.dp[j] / o.p[j];
    }
    return c;
}

/// CFI of vacuum + projections onto `vectors` (node samples of the packet) + remainder.
inline double measurement_cfi(const ModalSet& m, const std::vector<CVec>& vectors) {
    OutcomeDistribution o;
    o.p.push_back(m.loss.p);
    o.dp.push_back(m.loss.dp);
    double sp = 0.0, sdp = 0.0;
    for (const auto& v : vectors) {
        const cplx a = inner(m.packet.weights, v, m.packet.value);
        const cplx da = inner(m.packet.weights, v, m.packet.d_value);
        o.p.push_back(std::norm(a));
        o.dp.push_back(2.0 * std::real(std::conj(a) * da));
        sp += o.p.back();
        sdp += o.dp.back();
    }
    o.p.push_back(m.norm_sq - sp);
    o.dp.push_back(2.0 * m.overlap.real() - sdp);
    return mode_cfi(o);
}

/// A two-element projective measurement on the photon subspace.
struct TwoOutcomeMeasurement {
    CVec plus;
    CVec minus;
    double cfi = 0.0;            ///< including vacuum and remainder outcomes
    double orthonormality = 0.0;  ///< max deviation of the 2x2 Gram matrix from identity
};

namespace detail {

// Normalized conditional state psi = psi~/sqrt(1-p) and its Gamma-derivative.
inline std::pair<CVec, CVec> conditional_state(const ModalSet& m) {
    const double keep = 1.0 - m.loss.p;
    if (keep < 1e-12) throw Error(ErrorKind::VacuumOnly, "no photon amplitude left in the pulse mode");
    const double a = 1.0 / std::sqrt(keep), da = 0.5 * m.loss.dp / (keep * std::sqrt(keep));
    CVec psi(m.packet.value.size()), dpsi(m.packet.value.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        psi[i] = a * m.packet.value[i];
        dpsi[i] = a * m.packet.d_value[i] + da * m.packet.value[i];
    }
    return {psi, dpsi};
}

inline double pair_defect(const std::vector<double>& w, const CVec& a, const CVec& b) {
    return std::max({std::abs(norm_squared(w, a) - 1.0), std::abs(norm_squared(w, b) - 1.0), std::abs(inner(w, a, b))});
}

}  // namespace detail

/// |phi_+/-> = (1 +/- i) (|psi>/2 +/- |dpsi>/sqrt(Q)) for the conditional state
/// psi, where Q is its QFI. Requires <psi|dpsi> = 0 (within 1e-6).
inline TwoOutcomeMeasurement optimal_two_outcome_povm(const ModalSet& m, double qfi) {
    if (std::abs(m.normalized_overlap()) > 1e-6)
        throw Error(ErrorKind::AsymmetricPulse, "<psi|dpsi> does not vanish; no fixed optimal basis of this form");
    if (!(qfi > 0.0)) throw Error(ErrorKind::ZeroInformation, "the conditional state carries no information");
    const auto [psi, dpsi] = detail::conditional_state(m);
    const double s = 1.0 / std::sqrt(qfi);
    TwoOutcomeMeasurement r;
    r.plus.resize(psi.size());
    r.minus.resize(psi.size());
    const cplx cp(1.0, 1.0), cm(1.0, -1.0);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        r.plus[i] = cp * (0.5 * psi[i] + s * dpsi[i]);
        r.minus[i] = cm * (0.5 * psi[i] - s * dpsi[i]);
    }
    r.orthonormality = detail::pair_defect(m.packet.weights, r.plus, r.minus);
    r.cfi = measurement_cfi(m, {r.plus, r.minus});
    return r;
}

/// Eigenvectors (psi +/- e)/sqrt(2) of the symmetric logarithmic derivative
/// restricted to span{psi, dpsi}, with e the normalized part of dpsi
/// orthogonal to psi. Saturates the QFI whether or not <psi|dpsi> vanishes.
inline TwoOutcomeMeasurement sld_eigenbasis(const ModalSet& m) {
    const auto [psi, dpsi] = detail::conditional_state(m);
    const auto& w = m.packet.weights;
    const cplx a = inner(w, psi, dpsi);
    CVec e(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) e[i] = dpsi[i] - a * psi[i];
    const double c = std::sqrt(norm_squared(w, e));
    if (c < 1e-12) throw Error(ErrorKind::ZeroInformation, "dpsi is parallel to psi");
    TwoOutcomeMeasurement r;
    r.plus.resize(psi.size());
    r.minus.resize(psi.size());
    const double h = 1.0 / std::numbers::sqrt2;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        r.plus[i] = h * (psi[i] + e[i] / c);
        r.minus[i] = h * (psi[i] - e[i] / c);
    }
    r.orthonormality = detail::pair_defect(w, r.plus, r.minus);
    r.cfi = measurement_cfi(m, {r.plus, r.minus});
    return r;
}

/// 4 sum|d_j|^2 - 4 (Im sum b_j* d_j)^2 / (1 - p) + (dp)^2 / p from modal data
/// alone. Raises TruncationNotConverged unless |d_J|^2 < 1e-8.
inline double modal_qfi_check(const ModalSet& m, const AmplitudePair& loss) {
    if (m.d.empty() || std::norm(m.d.back()) >= 1e-8)
        throw Error(ErrorKind::TruncationNotConverged, "modal derivative sum has not converged at this J");
    double dd = 0.0;
    cplx ov = 0.0;
    for (std::size_t j = 0; j < m.b.size(); ++j) {
        dd += std::norm(m.d[j]);
        ov += std::conj(m.b[j]) * m.d[j];
    }
    const double keep = 1.0 - loss.p;
    if (keep < 1e-12) throw Error(ErrorKind::VacuumOnly, "no photon amplitude left in the pulse mode");
    double q = 4.0 * dd - 4.0 * ov.imag() * ov.imag() / keep;
    if (loss.p > 0.0) q += loss.dp * loss.dp / loss.p;
    return q;
}

}  // namespace chirpqfi
