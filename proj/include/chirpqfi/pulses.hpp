#pragma once

#include <chirpqfi/config.hpp>
#include <chirpqfi/error.hpp>
#include <chirpqfi/numerics/fourier.hpp>
#include <chirpqfi/numerics/grid.hpp>
#include <chirpqfi/numerics/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

namespace chirpqfi {

enum class Envelope { Gaussian, Exponential };

struct NoModulation {};
/// phi(t) = alpha t
struct LinearPhase {
    double alpha = 0.0;
};
/// phi(t) = k t^2
struct QuadraticPhase {
    double k = 0.0;
};
/// phi(t) = sin(Omega t)
struct SinusoidalPhase {
    double omega = 0.0;
};

using Modulation = std::variant<NoModulation, LinearPhase, QuadraticPhase, SinusoidalPhase>;

/// xi(t) = xi_R(t) e^{i phi(t)} in units where Gamma = 1; `duration` is Gamma*T.
struct PulseSpec {
    Envelope envelope = Envelope::Gaussian;
    double duration = 1.0;
    Modulation modulation = NoModulation{};

    void validate() const {
        if (!(duration > 0.0) || !std::isfinite(duration))
            throw Error(ErrorKind::InvalidArgument, "pulse duration must be positive and finite");
        const bool ok = std::visit(
            [](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, LinearPhase>) return std::isfinite(m.alpha);
                else if constexpr (std::is_same_v<M, QuadraticPhase>) return std::isfinite(m.k);
                else if constexpr (std::is_same_v<M, SinusoidalPhase>) return std::isfinite(m.omega);
                else return true;
            },
            modulation);
        if (!ok) throw Error(ErrorKind::InvalidArgument, "modulation parameter must be finite");
    }
};

inline PulseSpec gaussian(double duration, Modulation m = NoModulation{}) {
    return {Envelope::Gaussian, duration, m};
}
inline PulseSpec exponential(double duration, Modulation m = NoModulation{}) {
    return {Envelope::Exponential, duration, m};
}

inline const char* modulation_name(const Modulation& m) {
    switch (m.index()) {
        case 1: return "linear";
        case 2: return "quadratic";
        case 3: return "sinusoidal";
        default: return "none";
    }
}

// ---------------------------------------------------------------------------
// Pointwise evaluation

inline double phase(const PulseSpec& s, double t) {
    switch (s.modulation.index()) {
        case 1: return std::get<LinearPhase>(s.modulation).alpha * t;
        case 2: return std::get<QuadraticPhase>(s.modulation).k * t * t;
        case 3: return std::sin(std::get<SinusoidalPhase>(s.modulation).omega * t);
        default: return 0.0;
    }
}

inline double phase_rate(const PulseSpec& s, double t) {
    switch (s.modulation.index()) {
        case 1: return std::get<LinearPhase>(s.modulation).alpha;
        case 2: return 2.0 * std::get<QuadraticPhase>(s.modulation).k * t;
        case 3: {
            const double w = std::get<SinusoidalPhase>(s.modulation).omega;
            return w * std::cos(w * t);
        }
        default: return 0.0;
    }
}

/// Largest |phi'| over [a, b].
inline double max_phase_rate(const PulseSpec& s, double a, double b) {
    switch (s.modulation.index()) {
        case 1: return std::abs(std::get<LinearPhase>(s.modulation).alpha);
        case 2: return 2.0 * std::abs(std::get<QuadraticPhase>(s.modulation).k) * std::max(std::abs(a), std::abs(b));
        case 3: return std::abs(std::get<SinusoidalPhase>(s.modulation).omega);
        default: return 0.0;
    }
}

/// Real envelope xi_R(t); the exponential is taken right-continuous at 0.
inline double envelope_value(const PulseSpec& s, double t) {
    const double T = s.duration;
    if (s.envelope == Envelope::Gaussian) return std::pow(2.0 * std::numbers::pi * T * T, -0.25) * std::exp(-t * t / (4.0 * T * T));
    return t < 0.0 ? 0.0 : std::exp(-t / (2.0 * T)) / std::sqrt(T);
}

inline cplx pulse_value(const PulseSpec& s, double t) { return envelope_value(s, t) * std::polar(1.0, phase(s, t)); }

/// d xi / dt (right derivative at the exponential onset).
inline cplx pulse_time_derivative(const PulseSpec& s, double t) {
    const double T = s.duration;
    const double log_slope = s.envelope == Envelope::Gaussian ? -t / (2.0 * T * T) : -1.0 / (2.0 * T);
    return cplx(log_slope, phase_rate(s, t)) * pulse_value(s, t);
}

/// Interval holding the pulse to the required sampling accuracy.
inline std::pair<double, double> pulse_support(const PulseSpec& s) {
    return s.envelope == Envelope::Gaussian ? std::pair{-8.0 * s.duration, 8.0 * s.duration}
                                            : std::pair{0.0, 12.0 * s.duration};
}

// ---------------------------------------------------------------------------
// Sampling

struct WindowOptions {
    std::optional<double> left;   ///< grid start (default -8T or -1)
    std::optional<double> right;  ///< grid end (default support end + tail)
    std::optional<double> dt;     ///< spacing (default from duration and chirp)
    double tail = 60.0;           ///< decay time appended after the pulse support
};

/// Default spacing: max(1, 1/T) dt <= 1e-3, and dt |phi'| <= 0.05 over the support.
inline double default_spacing(const PulseSpec& s) {
    const auto [a, b] = pulse_support(s);
    double dt = 1e-3 / std::max(1.0, 1.0 / s.duration);
    const double rate = max_phase_rate(s, a, b);
    if (rate > 0.0) dt = std::min(dt, 0.05 / rate);
    return dt;
}

/// Uniform grid for the dynamics of `s`. When the start is negative the
/// spacing is shrunk slightly so that t = 0 is a node.
inline Grid default_grid(const PulseSpec& s, const WindowOptions& opt = {}) {
    s.validate();
    const auto [a, b] = pulse_support(s);
    const double left = opt.left.value_or(s.envelope == Envelope::Gaussian ? a : -1.0);
    const double right = opt.right.value_or(b + opt.tail);
    double dt = opt.dt.value_or(default_spacing(s));
    if (left < 0.0) dt = -left / std::ceil(-left / dt - 1e-9);
    return Grid::with_spacing(left, right, dt);
}

/// Samples of xi and of its time derivative on a grid; nodes before `first`
/// are outside the support and exactly zero.
struct SampledPulse {
    Grid grid;
    PulseSpec spec;
    CVec values;
    CVec time_derivative;
    std::size_t first = 0;

    std::vector<double> weights() const { return trapezoid_weights(grid, first); }
};

inline SampledPulse sample_pulse(const PulseSpec& s, const Grid& grid) {
    s.validate();
    const auto [a, b] = pulse_support(s);
    const double slack = 1e-9 * std::max(1.0, s.duration);
    if (grid.t_start() > a + slack || grid.t_end() < b - slack)
        throw Error(ErrorKind::GridTooNarrow, "grid does not cover the pulse support");
    std::size_t first = 0;
    if (s.envelope == Envelope::Exponential) {
        if (grid.t_start() < 0.0) first = grid.node_index(0.0);
    }
    SampledPulse out{grid, s, CVec(grid.size(), 0.0), CVec(grid.size(), 0.0), first};
    for (std::size_t i = first; i < grid.size(); ++i) {
        const double t = i == first && s.envelope == Envelope::Exponential ? std::max(0.0, grid.t(i)) : grid.t(i);
        out.values[i] = pulse_value(s, t);
        out.time_derivative[i] = pulse_time_derivative(s, t);
    }
    const double norm = std::sqrt(norm_squared(out.weights(), out.values));
    for (std::size_t i = first; i < grid.size(); ++i) {
        out.values[i] /= norm;
        out.time_derivative[i] /= norm;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frequency domain

/// Analytic xi~(w) where one exists (Gaussian with none/linear/quadratic,
/// exponential with none/linear); std::nullopt otherwise.
inline std::optional<cplx> spectrum_closed_form(const PulseSpec& s, double w) {
    const double T = s.duration;
    double shift = 0.0;
    if (auto* lin = std::get_if<LinearPhase>(&s.modulation)) shift = lin->alpha;
    const bool quad = std::holds_alternative<QuadraticPhase>(s.modulation);
    if (std::holds_alternative<SinusoidalPhase>(s.modulation)) return std::nullopt;
    if (s.envelope == Envelope::Exponential) {
        if (quad) return std::nullopt;
        return (1.0 / std::sqrt(2.0 * std::numbers::pi * T)) / cplx(0.5 / T, -(w + shift));
    }
    if (quad) {
        const double k = std::get<QuadraticPhase>(s.modulation).k;
        const cplx a(0.25 / (T * T), -k);
        const double A = std::pow(2.0 * std::numbers::pi * T * T, -0.25);
        return A / std::sqrt(2.0 * a) * std::exp(-w * w / (4.0 * a));
    }
    const double x = w + shift;
    return std::pow(2.0 * T * T / std::numbers::pi, 0.25) * std::exp(-T * T * x * x);
}

/// Spectrum of a pulse, analytic when available and otherwise tabulated by
/// discrete Fourier transform of a dedicated sampling of the pulse.
///
/// For the exponential envelope the onset jump is split off first: the
/// transform of s(t) = Theta(t) e^{-t/2T} e^{i phi(0) + i phi'(0) t} / sqrt(T)
/// is a Lorentzian in closed form, and only the residual xi - s, which
/// vanishes to first order at the onset, is sampled. The residual spectrum
/// decays like 1/w^3, so outside the tabulated range xi~ equals the
/// Lorentzian part to within the truncation error.
class PulseSpectrum {
public:
    explicit PulseSpectrum(const PulseSpec& s, bool force_tabulated = false) : spec_(s) {
        s.validate();
        const double T = s.duration;
        double shift = 0.0;
        if (auto* lin = std::get_if<LinearPhase>(&s.modulation)) shift = lin->alpha;
        center_ = -shift;
        scale_ = 1.0 / (2.0 * T);
        if (auto* q = std::get_if<QuadraticPhase>(&s.modulation); q && s.envelope == Envelope::Gaussian)
            scale_ = std::sqrt(1.0 + 16.0 * q->k * q->k * T * T * T * T) / (2.0 * T);
        tabulated_ = force_tabulated || !spectrum_closed_form(s, 0.0).has_value();
        if (tabulated_) tabulate();
    }

    cplx operator()(double w) const {
        if (!tabulated_) return *spectrum_closed_form(spec_, w);
        return singular(w) + (*residual_)(w);
    }

    bool tabulated() const noexcept { return tabulated_; }
    double center() const noexcept { return center_; }
    double scale() const noexcept { return scale_; }
    /// Frequency range of the tabulation (the whole line for closed forms).
    std::pair<double, double> range() const noexcept { return range_; }
    bool edge_leakage() const noexcept { return residual_ && residual_->edge_leakage(); }
    const PulseSpec& spec() const noexcept { return spec_; }

    /// True when a closed-form Lorentzian onset part is split off.
    bool has_singular_part() const noexcept { return tabulated_ && spec_.envelope == Envelope::Exponential; }
    /// Onset part of the spectrum (zero unless has_singular_part()).
    cplx singular(double w) const noexcept {
        if (!has_singular_part()) return 0.0;
        const double T = spec_.duration;
        return onset_phase_ / (std::sqrt(2.0 * std::numbers::pi * T) * cplx(0.5 / T, -(w + onset_rate_)));
    }
    /// Residual spectrum on the uniform FFT frequency grid.
    const SpectrumSamples& table() const { return *table_; }

private:
    void tabulate() {
        const double T = spec_.duration;
        double left, right, width;
        if (spec_.envelope == Envelope::Gaussian) {
            // |xi| < 1e-8 of its peak beyond 8.6 T.
            left = -9.0 * T;
            right = 9.0 * T;
            const double rate = max_phase_rate(spec_, left, right);
            const double sidebands = std::holds_alternative<SinusoidalPhase>(spec_.modulation) ? 12.0 * rate : rate;
            width = sidebands + 12.0 / (2.0 * T);
        } else {
            // Amplitude e^{-t/2T}/sqrt(T) reaches 1e-12 at the cut. The
            // residual spectrum falls off like 1/w^3 beyond the chirp band.
            left = 0.0;
            right = 2.0 * T * std::log(1e12 / std::sqrt(T));
            width = max_phase_rate(spec_, left, right) + 2000.0;
            onset_phase_ = std::polar(1.0, phase(spec_, 0.0));
            onset_rate_ = phase_rate(spec_, 0.0);
        }
        // Nyquist frequency 2*width keeps aliases of the band below the tail.
        const double dt = std::numbers::pi / (2.0 * width);
        const Grid g = Grid::with_spacing(left, right, dt);
        CVec x(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = g.t(i);
            x[i] = pulse_value(spec_, t);
            if (has_singular_part())
                x[i] -= onset_phase_ * std::polar(std::exp(-t / (2.0 * T)) / std::sqrt(T), onset_rate_ * t);
        }
        // Zero padding sets the frequency spacing; the trapezoid sum over the
        // frequency grid is then accurate to about exp(-a L) for an integrand
        // analytic in a strip of half-width a, L the padded length.
        const double padded = std::max(2.0 * (right - left), 120.0);
        std::size_t n = 2;
        while (static_cast<double>(n) * dt < padded) n *= 2;
        table_ = std::make_shared<SpectrumSamples>(fft_transform(x, g, n));
        residual_ = std::make_shared<SampledTransform>(std::move(x), g);
        range_ = {table_->grid.w_min(), table_->grid.w_max()};
    }

    PulseSpec spec_;
    bool tabulated_ = false;
    double center_ = 0.0, scale_ = 1.0;
    cplx onset_phase_ = 1.0;
    double onset_rate_ = 0.0;
    std::pair<double, double> range_{-INFINITY, INFINITY};
    std::shared_ptr<const SampledTransform> residual_;
    std::shared_ptr<const SpectrumSamples> table_;
};

/// Integral over the real line of g(w, xi~(w)), where g(w, 0) = 0.
///
/// Closed-form spectra use adaptive quadrature. Tabulated spectra use the
/// trapezoid sum over the FFT frequency grid; with an onset part s(w) split
/// off, g(w, s) is integrated adaptively over the whole line and the sum
/// only carries g(w, s + r) - g(w, s).
template <class G>
auto integrate_spectrum(const PulseSpectrum& sp, G&& g, const std::vector<double>& breaks, const QuadOptions& opt) {
    using V = std::decay_t<decltype(g(0.0, cplx{}))>;
    using detail::operator+=;
    using detail::operator-;
    using detail::operator*;
    std::vector<double> b = breaks;
    b.push_back(sp.center());
    if (!sp.tabulated()) return integrate_real_line([&](double w) { return g(w, sp(w)); }, sp.center(), sp.scale(), b, opt);

    const auto& tab = sp.table();
    V sum = detail::QuadValue<V>::zero();
    for (std::size_t j = 0; j < tab.grid.size(); ++j) {
        const double w = tab.grid.omega(j);
        if (sp.has_singular_part()) {
            const cplx s = sp.singular(w);
            sum += g(w, s + tab.values[j]) - g(w, s);
        } else {
            sum += g(w, tab.values[j]);
        }
    }
    V total = tab.grid.dw() * sum;
    if (sp.has_singular_part())
        total += integrate_real_line([&](double w) { return g(w, sp.singular(w)); }, sp.center(), sp.scale(), b, opt);
    return total;
}

/// Root-mean-square width of |xi~(w)|^2 about its mean (units of Gamma).
inline double bandwidth(const PulseSpec& s) {
    s.validate();
    if (s.envelope == Envelope::Exponential)
        throw Error(ErrorKind::DivergentMoment, "the exponential pulse has a Lorentzian spectrum with no second moment");
    const double sigma = 1.0 / (2.0 * s.duration);
    if (std::holds_alternative<NoModulation>(s.modulation) || std::holds_alternative<LinearPhase>(s.modulation))
        return sigma;
    if (auto* q = std::get_if<QuadraticPhase>(&s.modulation)) {
        const double T = s.duration;
        return std::sqrt(1.0 + 16.0 * q->k * q->k * T * T * T * T) * sigma;
    }
    const PulseSpectrum sp(s);
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    const auto m = integrate_spectrum(
        sp,
        [](double w, cplx x) {
            const double d = std::norm(x);
            return std::array<double, 3>{d, w * d, w * w * d};
        },
        {}, opt);
    const double mean = m[1] / m[0];
    return std::sqrt(std::max(0.0, m[2] / m[0] - mean * mean));
}

/// True when |xi~(c + w)|^2 and |xi~(c - w)|^2 agree within `tol` at every
/// node w of the symmetric frequency grid.
inline bool spectral_symmetry(const PulseSpectrum& sp, const FrequencyGrid& grid, double tol, double center = 0.0) {
    if (!grid.is_symmetric()) throw Error(ErrorKind::InvalidArgument, "spectral symmetry needs a symmetric grid");
    for (std::size_t i = 0; i < grid.size() / 2 + 1; ++i) {
        const double w = grid.omega(i);
        if (std::abs(std::norm(sp(center + w)) - std::norm(sp(center - w))) > tol) return false;
    }
    return true;
}

inline bool spectral_symmetry(const PulseSpec& s, const FrequencyGrid& grid, double tol, double center = 0.0) {
    return spectral_symmetry(PulseSpectrum(s), grid, tol, center);
}

// ---------------------------------------------------------------------------
// Key-value form: envelope, gamma_t, modulation, alpha, k, omega

inline KeyValues to_key_values(const PulseSpec& s) {
    KeyValues kv;
    kv["envelope"] = s.envelope == Envelope::Gaussian ? "gaussian" : "exponential";
    kv["gamma_t"] = format_number(s.duration);
    kv["modulation"] = modulation_name(s.modulation);
    if (auto* m = std::get_if<LinearPhase>(&s.modulation)) kv["alpha"] = format_number(m->alpha);
    if (auto* m = std::get_if<QuadraticPhase>(&s.modulation)) kv["k"] = format_number(m->k);
    if (auto* m = std::get_if<SinusoidalPhase>(&s.modulation)) kv["omega"] = format_number(m->omega);
    return kv;
}

inline PulseSpec pulse_from_key_values(const KeyValues& kv) {
    PulseSpec s;
    const auto env = get_string(kv, "envelope", "gaussian");
    if (env == "gaussian") s.envelope = Envelope::Gaussian;
    else if (env == "exponential") s.envelope = Envelope::Exponential;
    else throw Error(ErrorKind::ConfigError, "envelope must be gaussian or exponential, got '" + env + "'");
    s.duration = get_number(kv, "gamma_t", 1.0);
    const auto mod = get_string(kv, "modulation", "none");
    if (mod == "none") s.modulation = NoModulation{};
    else if (mod == "linear") s.modulation = LinearPhase{get_number(kv, "alpha", 0.0)};
    else if (mod == "quadratic") s.modulation = QuadraticPhase{get_number(kv, "k", 0.0)};
    else if (mod == "sinusoidal") s.modulation = SinusoidalPhase{get_number(kv, "omega", 0.0)};
    else throw Error(ErrorKind::ConfigError, "unknown modulation '" + mod + "'");
    try {
        s.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, e.what());
    }
    return s;
}

}  // namespace chirpqfi
