#pragma once

#include <chirpqfi/error.hpp>
#include <chirpqfi/numerics/grid.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <vector>

namespace chirpqfi {

inline constexpr double kEdgeThreshold = 1e-8;

/// Transform values on a frequency grid. `edge_leakage` is set when the
/// time-domain input had not decayed below 1e-8 at either grid edge.
struct SpectrumSamples {
    FrequencyGrid grid;
    CVec values;
    bool edge_leakage = false;
};

namespace detail {

// sum_i w_i x_i e^{i s w t_i} / sqrt(2 pi) via a phasor recurrence that is
// re-anchored every 256 nodes to keep the accumulated rotation error small.
inline cplx trapezoid_transform(const CVec& x, const std::vector<double>& w, double t0, double dt,
                                std::size_t first, std::size_t last, double omega, double sign) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    cplx acc = 0.0;
    const cplx step = std::polar(1.0, sign * omega * dt);
    cplx ph;
    for (std::size_t i = first; i < last; ++i) {
        if ((i - first) % 256 == 0) ph = std::polar(1.0, sign * omega * (t0 + static_cast<double>(i) * dt));
        acc += w[i] * x[i] * ph;
        ph *= step;
    }
    return acc * inv_sqrt_2pi;
}

inline std::size_t last_nonzero(const std::vector<double>& w) {
    std::size_t last = w.size();
    while (last > 0 && w[last - 1] == 0.0) --last;
    return last;
}

}  // namespace detail

/// Forward transform xi~(w) = (1/sqrt(2 pi)) int xi(t) e^{+i w t} dt by the
/// trapezoid rule on `grid` (nodes from `first` on), evaluated at every node
/// of `freq`.
inline SpectrumSamples discrete_fourier(const CVec& samples, const Grid& grid, const FrequencyGrid& freq,
                                        std::size_t first = 0) {
    if (samples.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "sample count differs from grid");
    const auto w = trapezoid_weights(grid, first);
    SpectrumSamples out{freq, CVec(freq.size()), false};
    out.edge_leakage = std::abs(samples.front()) > kEdgeThreshold || std::abs(samples.back()) > kEdgeThreshold;
    for (std::size_t j = 0; j < freq.size(); ++j)
        out.values[j] = detail::trapezoid_transform(samples, w, grid.t_start(), grid.dt(), first, grid.size(),
                                                    freq.omega(j), +1.0);
    return out;
}

/// Inverse (conjugate) transform xi(t) = (1/sqrt(2 pi)) int xi~(w) e^{-i w t} dw,
/// trapezoid over the frequency grid, evaluated on every node of `grid`.
inline CVec inverse_discrete_fourier(const SpectrumSamples& spectrum, const Grid& grid) {
    const auto& f = spectrum.grid;
    std::vector<double> w(f.size(), f.dw());
    w.front() *= 0.5;
    w.back() *= 0.5;
    CVec out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = detail::trapezoid_transform(spectrum.values, w, f.w_min(), f.dw(), 0, f.size(), grid.t(i), -1.0);
    return out;
}

namespace detail {

// FFTW planning is not thread-safe; execution of a finished plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// The same trapezoid transform as discrete_fourier, evaluated at once on the
/// `n_fft` frequencies omega_j = (j - n_fft/2) dw, dw = 2 pi / (n_fft dt), by
/// zero-padding the samples to n_fft nodes and taking one FFT.
inline SpectrumSamples fft_transform(const CVec& samples, const Grid& grid, std::size_t n_fft, std::size_t first = 0) {
    if (samples.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "sample count differs from grid");
    if (n_fft < grid.size() || n_fft % 2 != 0)
        throw Error(ErrorKind::InvalidArgument, "FFT length must be even and cover the grid");
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    const auto w = trapezoid_weights(grid, first);
    const double dt = grid.dt(), dw = 2.0 * std::numbers::pi / (static_cast<double>(n_fft) * dt);
    const auto half = static_cast<std::ptrdiff_t>(n_fft / 2);

    // e^{i w_j t_i} = e^{i w_j t_0} (-1)^i e^{2 pi i j i / n}
    CVec buf(n_fft, 0.0);
    for (std::size_t i = first; i < samples.size(); ++i) buf[i] = (i % 2 ? -1.0 : 1.0) * w[i] * samples[i];
    auto* io = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n_fft), io, io, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    SpectrumSamples out{FrequencyGrid(-static_cast<double>(half) * dw, static_cast<double>(half - 1) * dw, n_fft),
                        CVec(n_fft), false};
    out.edge_leakage = std::abs(samples.front()) > kEdgeThreshold || std::abs(samples.back()) > kEdgeThreshold;
    for (std::size_t j = 0; j < n_fft; ++j) {
        const double omega = static_cast<double>(static_cast<std::ptrdiff_t>(j) - half) * dw;
        out.values[j] = std::polar(inv_sqrt_2pi, omega * grid.t_start()) * buf[j];
    }
    return out;
}

/// On-demand trapezoid transform of fixed samples at arbitrary frequencies.
class SampledTransform {
public:
    SampledTransform(CVec samples, const Grid& grid, std::size_t first = 0)
        : samples_(std::move(samples)), grid_(grid), first_(first), w_(trapezoid_weights(grid, first)) {
        if (samples_.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "sample count differs from grid");
        last_ = detail::last_nonzero(w_);
        edge_leakage_ = std::abs(samples_.front()) > kEdgeThreshold || std::abs(samples_.back()) > kEdgeThreshold;
    }

    cplx operator()(double omega) const {
        return detail::trapezoid_transform(samples_, w_, grid_.t_start(), grid_.dt(), first_, last_, omega, +1.0);
    }

    bool edge_leakage() const noexcept { return edge_leakage_; }
    const Grid& grid() const noexcept { return grid_; }

private:
    CVec samples_;
    Grid grid_;
    std::size_t first_, last_ = 0;
    std::vector<double> w_;
    bool edge_leakage_ = false;
};

}  // namespace chirpqfi
