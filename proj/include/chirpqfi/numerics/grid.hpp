#pragma once

#include <chirpqfi/error.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace chirpqfi {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Uniform time grid t_i = t_start + i*dt, i = 0..n_points-1 (time in 1/Gamma).
class Grid {
public:
    Grid(double t_start, double t_end, std::size_t n_points)
        : t_start_(t_start), t_end_(t_end), n_(n_points) {
        if (!(std::isfinite(t_start) && std::isfinite(t_end)) || !(t_start < t_end))
            throw Error(ErrorKind::InvalidInterval, "grid requires t_start < t_end");
        if (n_points < 2) throw Error(ErrorKind::InvalidArgument, "grid requires n_points >= 2");
        dt_ = (t_end - t_start) / static_cast<double>(n_points - 1);
    }

    /// Grid with spacing exactly `dt` starting at t_start and reaching at least t_min_end.
    static Grid with_spacing(double t_start, double t_min_end, double dt) {
        if (!(dt > 0)) throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
        const auto steps = static_cast<std::size_t>(std::ceil((t_min_end - t_start) / dt - 1e-9));
        return Grid(t_start, t_start + static_cast<double>(steps) * dt, steps + 1);
    }

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t size() const noexcept { return n_; }
    double dt() const noexcept { return dt_; }
    double t(std::size_t i) const noexcept {
        return i + 1 == n_ ? t_end_ : t_start_ + static_cast<double>(i) * dt_;
    }

    /// Index of the node at time `t`; NodeMismatch unless `t` is a node (to 1e-6 dt).
    std::size_t node_index(double t) const {
        const double x = (t - t_start_) / dt_;
        const double r = std::round(x);
        if (r < 0 || r > static_cast<double>(n_ - 1) || std::abs(x - r) > 1e-6)
            throw Error(ErrorKind::NodeMismatch, "time is not a grid node");
        return static_cast<std::size_t>(r);
    }

    bool same_as(const Grid& o) const noexcept {
        return n_ == o.n_ && t_start_ == o.t_start_ && t_end_ == o.t_end_;
    }

private:
    double t_start_, t_end_;
    std::size_t n_;
    double dt_;
};

/// Uniform angular-frequency grid (units of Gamma).
class FrequencyGrid {
public:
    FrequencyGrid(double w_min, double w_max, std::size_t n_points)
        : w_min_(w_min), w_max_(w_max), n_(n_points) {
        if (!(w_min < w_max)) throw Error(ErrorKind::InvalidInterval, "frequency grid requires w_min < w_max");
        if (n_points < 2) throw Error(ErrorKind::InvalidArgument, "frequency grid requires n_points >= 2");
        dw_ = (w_max - w_min) / static_cast<double>(n_points - 1);
    }

    static FrequencyGrid symmetric(double w_max, std::size_t n_points) {
        return FrequencyGrid(-w_max, w_max, n_points);
    }

    double w_min() const noexcept { return w_min_; }
    double w_max() const noexcept { return w_max_; }
    std::size_t size() const noexcept { return n_; }
    double dw() const noexcept { return dw_; }
    double omega(std::size_t i) const noexcept {
        return i + 1 == n_ ? w_max_ : w_min_ + static_cast<double>(i) * dw_;
    }
    bool is_symmetric() const noexcept { return std::abs(w_min_ + w_max_) <= 1e-12 * w_max_; }

private:
    double w_min_, w_max_;
    std::size_t n_;
    double dw_;
};

/// Trapezoid weights on nodes first..n-1 of `grid`; nodes before `first` get zero
/// weight. Starting at `first` lets a function with a jump at that node be
/// integrated with its right-limit value.
inline std::vector<double> trapezoid_weights(const Grid& grid, std::size_t first = 0) {
    std::vector<double> w(grid.size(), 0.0);
    if (first + 1 >= grid.size()) return w;
    for (std::size_t i = first; i < grid.size(); ++i) w[i] = grid.dt();
    w[first] *= 0.5;
    w.back() *= 0.5;
    return w;
}

/// Weighted inner product sum_i w_i conj(a_i) b_i.
inline cplx inner(const std::vector<double>& w, const CVec& a, const CVec& b) {
    cplx s = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] != 0.0) s += w[i] * std::conj(a[i]) * b[i];
    return s;
}

inline double norm_squared(const std::vector<double>& w, const CVec& a) {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::norm(a[i]);
    return s;
}

}  // namespace chirpqfi
