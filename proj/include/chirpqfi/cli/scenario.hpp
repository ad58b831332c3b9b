#pragma once

#include <chirpqfi/cli/csv.hpp>
#include <chirpqfi/config.hpp>
#include <chirpqfi/dynamics.hpp>
#include <chirpqfi/error.hpp>
#include <chirpqfi/fisher.hpp>
#include <chirpqfi/modes.hpp>
#include <chirpqfi/pulses.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace chirpqfi::cli {

enum class ModeKind { FiniteTime, Asymptotic, ModeCFI, ClosedForm };

inline const char* mode_name(ModeKind m) {
    switch (m) {
        case ModeKind::FiniteTime: return "finite_time";
        case ModeKind::Asymptotic: return "asymptotic";
        case ModeKind::ModeCFI: return "mode_cfi";
        case ModeKind::ClosedForm: return "closed_form";
    }
    return "?";
}

/// Every key a scenario or sweep configuration may contain.
inline const std::vector<std::string>& schema_keys() {
    static const std::vector<std::string> keys = {
        "envelope", "gamma_t", "modulation", "alpha",  "k",           "omega",        "gamma",  "delta", "mode",
        "t_start",  "t_stop",  "t_count",    "basis",  "j_max",       "dt",           "window_left",
        "window_right", "output", "sweep",   "sweep2"};
    return keys;
}

/// Keys a sweep axis may vary.
inline const std::set<std::string>& sweepable_keys() {
    static const std::set<std::string> keys = {"gamma_t", "alpha", "k",      "omega", "gamma",
                                               "delta",   "j_max", "t_stop", "dt"};
    return keys;
}

struct FiniteTimeSettings {
    std::optional<double> t_start;  ///< default: grid start
    std::optional<double> t_stop;   ///< default: grid end
    int t_count = 64;
};

struct ModeSettings {
    BasisKind basis = BasisKind::HermiteGauss;
    int j_max = 30;
};

/// One fully specified computation.
struct Scenario {
    PulseSpec pulse;
    double gamma = 0.0;  ///< Gamma_perp / Gamma
    double delta = 0.0;  ///< Delta / Gamma
    ModeKind mode = ModeKind::Asymptotic;
    FiniteTimeSettings finite;
    ModeSettings modal;
    WindowOptions window;
    std::string output;

    SystemParams params() const { return SystemParams::dimensionless(gamma, delta); }
};

namespace detail {

inline int integer_value(const KeyValues& kv, const std::string& key, int fallback) {
    const double v = get_number(kv, key, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e6)
        throw Error(ErrorKind::ConfigError, "key '" + key + "' must be an integer");
    return static_cast<int>(v);
}

inline std::optional<double> optional_number(const KeyValues& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return parse_number(key, it->second);
}

}  // namespace detail

/// Rejects unknown keys and keys that do not apply to the chosen modulation
/// or mode, so typos never fall back silently to defaults.
inline void check_keys(const KeyValues& kv) {
    const auto& known = schema_keys();
    for (const auto& [k, v] : kv)
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw Error(ErrorKind::ConfigError, "unknown key '" + k + "'");
    const auto mod = get_string(kv, "modulation", "none");
    const std::pair<const char*, const char*> owners[] = {{"alpha", "linear"}, {"k", "quadratic"}, {"omega", "sinusoidal"}};
    for (const auto& [key, owner] : owners)
        if (kv.count(key) && mod != owner)
            throw Error(ErrorKind::ConfigError, std::string("key '") + key + "' applies only to modulation " + owner);
    const auto mode = get_string(kv, "mode", "asymptotic");
    for (const char* key : {"t_start", "t_stop", "t_count"})
        if (kv.count(key) && mode != "finite_time")
            throw Error(ErrorKind::ConfigError, std::string("key '") + key + "' applies only to mode finite_time");
    for (const char* key : {"basis", "j_max"})
        if (kv.count(key) && mode != "mode_cfi")
            throw Error(ErrorKind::ConfigError, std::string("key '") + key + "' applies only to mode mode_cfi");
}

inline Scenario scenario_from_key_values(const KeyValues& kv) {
    check_keys(kv);
    Scenario s;
    s.pulse = pulse_from_key_values(kv);
    s.gamma = get_number(kv, "gamma", 0.0);
    s.delta = get_number(kv, "delta", 0.0);
    if (!(s.gamma >= 0.0)) throw Error(ErrorKind::ConfigError, "gamma must be non-negative");

    const auto mode = get_string(kv, "mode", "asymptotic");
    if (mode == "finite_time") s.mode = ModeKind::FiniteTime;
    else if (mode == "asymptotic") s.mode = ModeKind::Asymptotic;
    else if (mode == "mode_cfi") s.mode = ModeKind::ModeCFI;
    else if (mode == "closed_form") s.mode = ModeKind::ClosedForm;
    else throw Error(ErrorKind::ConfigError, "unknown mode '" + mode + "'");

    s.finite.t_start = detail::optional_number(kv, "t_start");
    s.finite.t_stop = detail::optional_number(kv, "t_stop");
    s.finite.t_count = detail::integer_value(kv, "t_count", 64);
    if (s.finite.t_count < 1) throw Error(ErrorKind::ConfigError, "t_count must be at least 1");
    if (s.finite.t_start && s.finite.t_stop && *s.finite.t_stop < *s.finite.t_start)
        throw Error(ErrorKind::ConfigError, "t_stop must not precede t_start");

    const auto basis = get_string(kv, "basis", "hermite_gauss");
    if (basis == "hermite_gauss") s.modal.basis = BasisKind::HermiteGauss;
    else if (basis == "envelope") s.modal.basis = BasisKind::GramSchmidtFromEnvelope;
    else throw Error(ErrorKind::ConfigError, "basis must be hermite_gauss or envelope, got '" + basis + "'");
    s.modal.j_max = detail::integer_value(kv, "j_max", 30);
    if (s.modal.j_max < 0) throw Error(ErrorKind::ConfigError, "j_max must be non-negative");

    s.window.dt = detail::optional_number(kv, "dt");
    s.window.left = detail::optional_number(kv, "window_left");
    s.window.right = detail::optional_number(kv, "window_right");
    if (s.window.dt && !(*s.window.dt > 0.0)) throw Error(ErrorKind::ConfigError, "dt must be positive");
    s.output = get_string(kv, "output", "");
    return s;
}

inline KeyValues to_key_values(const Scenario& s) {
    KeyValues kv = chirpqfi::to_key_values(s.pulse);
    kv["gamma"] = format_number(s.gamma);
    kv["delta"] = format_number(s.delta);
    kv["mode"] = mode_name(s.mode);
    if (s.mode == ModeKind::FiniteTime) {
        if (s.finite.t_start) kv["t_start"] = format_number(*s.finite.t_start);
        if (s.finite.t_stop) kv["t_stop"] = format_number(*s.finite.t_stop);
        kv["t_count"] = std::to_string(s.finite.t_count);
    }
    if (s.mode == ModeKind::ModeCFI) {
        kv["basis"] = basis_name(s.modal.basis);
        kv["j_max"] = std::to_string(s.modal.j_max);
    }
    if (s.window.dt) kv["dt"] = format_number(*s.window.dt);
    if (s.window.left) kv["window_left"] = format_number(*s.window.left);
    if (s.window.right) kv["window_right"] = format_number(*s.window.right);
    if (!s.output.empty()) kv["output"] = s.output;
    return kv;
}

// ---------------------------------------------------------------------------
// Single scenarios

inline const std::vector<std::string>& breakdown_columns() {
    static const std::vector<std::string> c = {"classical", "quantum", "total", "p_loss"};
    return c;
}

inline std::vector<double> breakdown_row(const FisherBreakdown& b) { return {b.classical, b.quantum, b.total, b.p_loss}; }

/// Closed forms exist for the real Gaussian on resonance (also a quadratic
/// chirp through its bandwidth) and for the exponential with linear phase.
inline FisherBreakdown scenario_closed_form(const Scenario& s) {
    const auto& p = s.pulse;
    double shift = 0.0;
    if (auto* lin = std::get_if<LinearPhase>(&p.modulation)) shift = lin->alpha;
    const bool sinusoidal = std::holds_alternative<SinusoidalPhase>(p.modulation);
    const bool quadratic = std::holds_alternative<QuadraticPhase>(p.modulation);
    if (p.envelope == Envelope::Exponential && !sinusoidal && !quadratic)
        return exponential_linear_closed_forms(s.gamma, p.duration, s.delta + shift);
    if (p.envelope == Envelope::Gaussian && !sinusoidal && s.delta + shift == 0.0)
        return gaussian_closed_forms(s.gamma, bandwidth(p));
    throw Error(ErrorKind::InvalidArgument, "no closed form for this pulse and detuning");
}

/// Dynamics grid of a scenario, widened to hold the requested detection times
/// and, for mode analysis, the Hermite-Gauss modes up to j_max.
inline Grid scenario_grid(const Scenario& s) {
    WindowOptions w = s.window;
    if (s.mode == ModeKind::FiniteTime) {
        const Grid base = default_grid(s.pulse, w);
        if (s.finite.t_start && *s.finite.t_start < base.t_start() && !w.left) w.left = *s.finite.t_start;
        if (s.finite.t_stop && *s.finite.t_stop > base.t_end() && !w.right) w.right = *s.finite.t_stop;
    }
    if (s.mode == ModeKind::ModeCFI && s.modal.basis == BasisKind::HermiteGauss) {
        const double reach = std::sqrt(2.0) * s.pulse.duration * (std::sqrt(2.0 * s.modal.j_max + 1.0) + 6.0);
        if (!w.left) w.left = std::min(s.pulse.envelope == Envelope::Gaussian ? -8.0 * s.pulse.duration : -1.0, -reach);
        if (!w.right) w.right = std::max(pulse_support(s.pulse).second + w.tail, reach);
    }
    return default_grid(s.pulse, w);
}

inline Table run_finite_time(const Scenario& s) {
    const Grid g = scenario_grid(s);
    const auto pulse = sample_pulse(s.pulse, g);
    const auto curve = finite_time_curve(pulse, s.params());
    const double a = s.finite.t_start.value_or(g.t_start()), b = s.finite.t_stop.value_or(g.t_end());
    if (a < g.t_start() - 1e-9 * g.dt() || b > g.t_end() + 1e-9 * g.dt())
        throw Error(ErrorKind::GridTooNarrow, "detection times fall outside the dynamics window");
    Table t{{"t"}, {}};
    for (const auto& c : breakdown_columns()) t.columns.push_back(c);
    const int n = s.finite.t_count;
    for (int i = 0; i < n; ++i) {
        const double want = n == 1 ? a : a + (b - a) * i / (n - 1);
        const auto idx = static_cast<std::size_t>(std::clamp(std::lround((want - g.t_start()) / g.dt()), 0L,
                                                             static_cast<long>(g.size() - 1)));
        auto row = breakdown_row(curve[idx]);
        row.insert(row.begin(), g.t(idx));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table run_mode_cfi(const Scenario& s) {
    const Grid g = scenario_grid(s);
    const auto pulse = sample_pulse(s.pulse, g);
    const auto params = s.params();
    const auto ex = excited_amplitude(pulse, params);
    const auto wp = outgoing_wavepacket(pulse, params, ex, g.t_end());
    const auto basis = build_basis(s.modal.basis, s.modal.j_max, pulse);
    const auto modal = project_amplitudes(wp, basis);
    const double qfi = modal.breakdown().total;
    if (!(qfi > 0.0)) throw Error(ErrorKind::ZeroInformation, "the scattered state carries no information");
    Table t{{"j", "mode_cfi", "qfi", "ratio"}, {}};
    for (int j = 0; j <= s.modal.j_max; ++j) {
        const double c = mode_cfi(outcome_distribution(modal, j));
        t.rows.push_back({static_cast<double>(j), c, qfi, c / qfi});
    }
    return t;
}

inline Table run_scenario(const Scenario& s) {
    switch (s.mode) {
        case ModeKind::FiniteTime: return run_finite_time(s);
        case ModeKind::Asymptotic: return {breakdown_columns(), {breakdown_row(asymptotic_qfi(s.pulse, s.params()))}};
        case ModeKind::ClosedForm: return {breakdown_columns(), {breakdown_row(scenario_closed_form(s))}};
        case ModeKind::ModeCFI: return run_mode_cfi(s);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown mode");
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepAxis {
    std::string key;
    double start = 0.0, stop = 0.0;
    int count = 2;

    /// Ascending values regardless of the order of start and stop.
    std::vector<double> values() const {
        std::vector<double> v(count);
        const double lo = std::min(start, stop), hi = std::max(start, stop);
        for (int i = 0; i < count; ++i) v[i] = i + 1 == count ? hi : lo + (hi - lo) * i / (count - 1);
        return v;
    }
    std::string text() const {
        return key + ":" + format_number(start) + ":" + format_number(stop) + ":" + std::to_string(count);
    }
};

inline SweepAxis parse_axis(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    for (;;) {
        const auto c = text.find(':', pos);
        parts.push_back(trim(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos)));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (parts.size() != 4) throw Error(ErrorKind::ConfigError, "sweep axis must read key:start:stop:count, got '" + text + "'");
    SweepAxis a;
    a.key = parts[0];
    if (!sweepable_keys().count(a.key)) throw Error(ErrorKind::ConfigError, "key '" + a.key + "' cannot be swept");
    a.start = parse_number("sweep start", parts[1]);
    a.stop = parse_number("sweep stop", parts[2]);
    const double n = parse_number("sweep count", parts[3]);
    if (n != std::floor(n) || n < 2 || n > 1e6) throw Error(ErrorKind::ConfigError, "sweep count must be an integer >= 2");
    a.count = static_cast<int>(n);
    return a;
}

/// Scenario template (flat key-value form) with one or two swept keys.
struct SweepSpec {
    KeyValues base;
    std::vector<SweepAxis> axes;
};

inline SweepSpec sweep_from_key_values(const KeyValues& kv) {
    SweepSpec s;
    s.base = kv;
    for (const char* key : {"sweep", "sweep2"}) {
        const auto it = kv.find(key);
        if (it == kv.end()) continue;
        s.axes.push_back(parse_axis(it->second));
        s.base.erase(key);
    }
    if (s.axes.empty()) throw Error(ErrorKind::ConfigError, "a sweep needs a 'sweep' axis");
    if (kv.count("sweep2") && !kv.count("sweep")) throw Error(ErrorKind::ConfigError, "'sweep2' requires 'sweep'");
    if (s.axes.size() == 2 && s.axes[0].key == s.axes[1].key)
        throw Error(ErrorKind::ConfigError, "the two sweep axes must vary different keys");
    s.base.erase("output");
    return s;
}

/// Thread count: the explicit value, else CHIRPQFI_THREADS, else the number
/// of logical cores.
inline unsigned resolve_threads(std::optional<unsigned> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("CHIRPQFI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        throw Error(ErrorKind::ConfigError, std::string("CHIRPQFI_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(i) for i in [0, n) on a pool of workers. After a failure no new
/// jobs start; the failure with the smallest index is rethrown.
template <class Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex m;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || abort.load()) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
                abort = true;
            }
        }
    };
    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (k <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

/// One block of rows per grid point, prefixed by the swept values; points are
/// ordered lexicographically by (first axis, second axis), both ascending.
inline Table run_sweep(const SweepSpec& sweep, unsigned threads = 1) {
    std::vector<std::vector<double>> points{{}};
    for (const auto& axis : sweep.axes) {
        std::vector<std::vector<double>> next;
        for (const auto& p : points)
            for (double v : axis.values()) {
                auto q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    std::vector<Table> results(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        KeyValues kv = sweep.base;
        std::string where;
        for (std::size_t a = 0; a < sweep.axes.size(); ++a) {
            kv[sweep.axes[a].key] = format_number(points[i][a]);
            where += (a ? ", " : "") + sweep.axes[a].key + "=" + format_number(points[i][a]);
        }
        try {
            results[i] = run_scenario(scenario_from_key_values(kv));
        } catch (const Error& e) {
            throw Error(e.kind(), "sweep row " + std::to_string(i) + " (" + where + "): " + e.detail());
        }
    });

    Table out;
    for (const auto& axis : sweep.axes) out.columns.push_back(axis.key);
    if (!results.empty())
        for (const auto& c : results.front().columns) out.columns.push_back(c);
    for (std::size_t i = 0; i < results.size(); ++i)
        for (const auto& row : results[i].rows) {
            std::vector<double> r = points[i];
            r.insert(r.end(), row.begin(), row.end());
            out.rows.push_back(std::move(r));
        }
    return out;
}

/// Runs a flat configuration: a sweep when it names a sweep axis, a single
/// scenario otherwise.
inline Table run_config(const KeyValues& kv, unsigned threads = 1) {
    if (kv.count("sweep") || kv.count("sweep2")) return run_sweep(sweep_from_key_values(kv), threads);
    return run_scenario(scenario_from_key_values(kv));
}

}  // namespace chirpqfi::cli
