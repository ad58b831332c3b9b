#pragma once

#include <chirpqfi/cli/csv.hpp>
#include <chirpqfi/cli/scenario.hpp>
#include <chirpqfi/config.hpp>
#include <chirpqfi/error.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace chirpqfi::cli {

/// One output table of a figure preset: its file name and the flat
/// configuration that produces it.
struct PresetEntry {
    std::string name;
    std::string file;
    KeyValues config;
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
    return names;
}

namespace detail {

struct Curve {
    std::string label;
    KeyValues pulse;  // modulation keys
};

inline std::vector<Curve> curves(std::initializer_list<Curve> c) { return c; }

inline KeyValues merge(KeyValues a, const KeyValues& b) {
    for (const auto& [k, v] : b) a[k] = v;
    return a;
}

inline void add_family(std::vector<PresetEntry>& out, const std::string& fig, const std::string& suffix,
                       const KeyValues& common, const std::vector<Curve>& cs) {
    for (const auto& c : cs) {
        const std::string name = fig + "_" + c.label + suffix;
        out.push_back({name, name + ".csv", merge(common, c.pulse)});
    }
}

}  // namespace detail

/// The scenario set behind each figure. Axes use 24 points over Gamma*T
/// (16 for fig3), 64 detection times for the finite-time figures, and mode
/// indices 0..25 for fig8.
inline std::vector<PresetEntry> figure_preset(const std::string& name) {
    using detail::Curve;
    std::vector<PresetEntry> out;
    const Curve real{"real", {{"modulation", "none"}}};
    const Curve linear{"linear", {{"modulation", "linear"}, {"alpha", "1"}}};
    const Curve quadratic{"quadratic", {{"modulation", "quadratic"}, {"k", "1"}}};
    const Curve sinusoidal{"sinusoidal", {{"modulation", "sinusoidal"}, {"omega", "1"}}};

    if (name == "fig3") {
        const KeyValues common{{"envelope", "gaussian"}, {"gamma", "1"}, {"mode", "asymptotic"}, {"sweep", "gamma_t:0.5:8:16"}};
        detail::add_family(out, name, "", common,
                           {real,
                            {"linear_alpha0.5", {{"modulation", "linear"}, {"alpha", "0.5"}}},
                            {"linear_alpha1", {{"modulation", "linear"}, {"alpha", "1"}}}});
    } else if (name == "fig4") {
        for (const char* g : {"0", "5"}) {
            const KeyValues common{{"envelope", "gaussian"}, {"gamma_t", "8"},   {"gamma", g},       {"mode", "finite_time"},
                                   {"t_start", "-32"},       {"t_stop", "64"},   {"t_count", "64"}};
            detail::add_family(out, name, std::string("_gamma") + g, common, {real, linear, quadratic, sinusoidal});
        }
    } else if (name == "fig5") {
        const KeyValues g5{{"envelope", "gaussian"}, {"gamma", "5"}, {"mode", "asymptotic"}, {"sweep", "gamma_t:0.25:8:24"}};
        detail::add_family(out, name, "_gamma5", g5,
                           {real, linear,
                            {"quadratic_k0.5", {{"modulation", "quadratic"}, {"k", "0.5"}}},
                            {"quadratic_k1", {{"modulation", "quadratic"}, {"k", "1"}}},
                            {"sinusoidal_omega0.5", {{"modulation", "sinusoidal"}, {"omega", "0.5"}}},
                            {"sinusoidal_omega1", {{"modulation", "sinusoidal"}, {"omega", "1"}}},
                            {"sinusoidal_omega2", {{"modulation", "sinusoidal"}, {"omega", "2"}}}});
        KeyValues g0 = g5;
        g0["gamma"] = "0";
        detail::add_family(out, name, "_gamma0", g0,
                           {real,
                            {"sinusoidal_omega0.5", {{"modulation", "sinusoidal"}, {"omega", "0.5"}}},
                            {"sinusoidal_omega1", {{"modulation", "sinusoidal"}, {"omega", "1"}}},
                            {"sinusoidal_omega2", {{"modulation", "sinusoidal"}, {"omega", "2"}}}});
    } else if (name == "fig6") {
        for (const char* g : {"0", "5"}) {
            const KeyValues common{{"envelope", "exponential"}, {"gamma", g}, {"mode", "asymptotic"}, {"sweep", "gamma_t:0.25:8:24"}};
            detail::add_family(out, name, std::string("_gamma") + g, common, {real, linear, quadratic});
        }
    } else if (name == "fig7") {
        for (const char* g : {"0", "5"}) {
            const KeyValues common{{"envelope", "exponential"}, {"gamma_t", "4"}, {"gamma", g},     {"mode", "finite_time"},
                                   {"t_start", "-2"},          {"t_stop", "48"},  {"t_count", "64"}};
            detail::add_family(out, name, std::string("_gamma") + g, common, {real, linear, quadratic});
        }
    } else if (name == "fig8") {
        const KeyValues common{{"envelope", "gaussian"}, {"gamma_t", "2.5"}, {"gamma", "5"},
                               {"mode", "mode_cfi"},     {"basis", "hermite_gauss"}, {"j_max", "25"}};
        detail::add_family(out, name, "", common, {real, linear, quadratic, sinusoidal});
    } else {
        throw Error(ErrorKind::UnknownPreset, "unknown preset '" + name + "' (expected fig3..fig8)");
    }
    return out;
}

/// Manifest with keys preset, scenarios, tool_version and config_hash; the
/// hash covers every scenario configuration in order.
inline nlohmann::json make_manifest(const std::string& preset, const std::vector<PresetEntry>& entries) {
    nlohmann::json m;
    m["preset"] = preset;
    m["tool_version"] = kToolVersion;
    std::string all;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries) {
        all += "[" + e.name + "]\n" + canonical_text(e.config);
        list.push_back({{"name", e.name}, {"file", e.file}, {"config", e.config}});
    }
    m["scenarios"] = list;
    m["config_hash"] = config_hash(all);
    return m;
}

inline std::vector<PresetEntry> entries_from_manifest(const nlohmann::json& m) {
    std::vector<PresetEntry> out;
    try {
        for (const auto& s : m.at("scenarios")) {
            PresetEntry e;
            e.name = s.at("name").get<std::string>();
            e.file = s.at("file").get<std::string>();
            e.config = s.at("config").get<KeyValues>();
            const std::filesystem::path f(e.file);
            if (f.is_absolute() || f.has_parent_path())
                throw Error(ErrorKind::ConfigError, "manifest file names must be plain names, got '" + e.file + "'");
            out.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorKind::ConfigError, std::string("malformed manifest: ") + ex.what());
    }
    if (make_manifest(m.value("preset", std::string{}), out)["config_hash"] != m.value("config_hash", std::string{}))
        throw Error(ErrorKind::ConfigError, "manifest config_hash does not match its scenarios");
    return out;
}

/// Runs every entry and writes its CSV into `dir`, then the manifest. A
/// failing entry aborts the run with the entry name in the message; files
/// already written stay complete, and no partial file is left behind.
inline nlohmann::json run_entries(const std::string& preset, const std::vector<PresetEntry>& entries,
                                  const std::filesystem::path& dir, unsigned threads) {
    for (const auto& e : entries) {
        try {
            const Table t = run_config(e.config, threads);
            write_file_atomic(dir / e.file, render_csv(t, e.config));
        } catch (const Error& err) {
            throw Error(err.kind(), e.name + ": " + err.detail());
        }
    }
    const auto manifest = make_manifest(preset, entries);
    write_file_atomic(dir / (preset + ".manifest.json"), manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace chirpqfi::cli
