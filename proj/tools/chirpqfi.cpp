// chirpqfi: scenario runner, sweep engine and figure presets.
//
//   chirpqfi run    --config FILE [--out PATH] [--threads N] [--<key> VALUE ...]
//   chirpqfi sweep  --config FILE --sweep key:start:stop:count [--sweep2 ...] [--out PATH]
//   chirpqfi preset figN --out-dir DIR [--threads N]
//   chirpqfi replay MANIFEST --out-dir DIR [--threads N]
//
// Flags named after configuration keys override the values from --config.

#include <chirpqfi/cli/csv.hpp>
#include <chirpqfi/cli/presets.hpp>
#include <chirpqfi/cli/scenario.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using namespace chirpqfi;
using namespace chirpqfi::cli;

struct TableCommand {
    std::string config_file;
    std::string out;
    unsigned threads = 0;
    std::map<std::string, std::string> overrides;
};

void add_table_options(CLI::App* cmd, TableCommand& c) {
    cmd->add_option("--config", c.config_file, "flat key = value configuration file");
    cmd->add_option("--out", c.out, "output CSV path (default: the 'output' key, else stdout)");
    cmd->add_option("--threads", c.threads, "worker threads (default: CHIRPQFI_THREADS, else logical cores)");
    for (const auto& key : schema_keys()) cmd->add_option("--" + key, c.overrides[key], "configuration key '" + key + "'");
}

KeyValues assemble_config(const TableCommand& c, const CLI::App* cmd) {
    KeyValues kv;
    if (!c.config_file.empty()) kv = parse_key_values(read_file(c.config_file));
    for (const auto& key : schema_keys())
        if (cmd->count("--" + key) > 0) kv[key] = trim(c.overrides.at(key));
    return kv;
}

void emit_table(const TableCommand& c, const KeyValues& kv) {
    const unsigned threads = resolve_threads(c.threads ? std::optional<unsigned>(c.threads) : std::nullopt);
    std::string path = c.out.empty() ? get_string(kv, "output", "") : c.out;
    const Table t = run_config(kv, threads);
    const std::string csv = render_csv(t, kv);
    if (path.empty() || path == "-") std::cout << csv;
    else write_file_atomic(path, csv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher information of a two-level system probed by chirped single-photon pulses"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    TableCommand run_cmd, sweep_cmd;
    auto* run = app.add_subcommand("run", "run one scenario (or a sweep when the configuration names one)");
    add_table_options(run, run_cmd);
    auto* sweep = app.add_subcommand("sweep", "run a one- or two-axis sweep");
    add_table_options(sweep, sweep_cmd);

    std::string preset_name, out_dir;
    unsigned preset_threads = 0;
    auto* preset = app.add_subcommand("preset", "write the tables behind a figure plus a JSON manifest");
    preset->add_option("name", preset_name, "fig3 .. fig8")->required();
    preset->add_option("--out-dir", out_dir, "output directory")->required();
    preset->add_option("--threads", preset_threads, "worker threads");

    std::string manifest_path, replay_dir;
    unsigned replay_threads = 0;
    auto* replay = app.add_subcommand("replay", "re-run every scenario listed in a manifest");
    replay->add_option("manifest", manifest_path, "manifest JSON written by 'preset'")->required();
    replay->add_option("--out-dir", replay_dir, "output directory")->required();
    replay->add_option("--threads", replay_threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    auto threads_of = [](unsigned t) { return resolve_threads(t ? std::optional<unsigned>(t) : std::nullopt); };
    try {
        if (*run) {
            emit_table(run_cmd, assemble_config(run_cmd, run));
        } else if (*sweep) {
            const auto kv = assemble_config(sweep_cmd, sweep);
            if (!kv.count("sweep")) throw Error(ErrorKind::ConfigError, "sweep needs --sweep key:start:stop:count");
            emit_table(sweep_cmd, kv);
        } else if (*preset) {
            const auto entries = figure_preset(preset_name);
            run_entries(preset_name, entries, out_dir, threads_of(preset_threads));
        } else if (*replay) {
            nlohmann::json m;
            try {
                m = nlohmann::json::parse(read_file(manifest_path));
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::ConfigError, std::string("cannot parse manifest: ") + e.what());
            }
            const auto entries = entries_from_manifest(m);
            run_entries(m.value("preset", std::string("replay")), entries, replay_dir, threads_of(replay_threads));
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "chirpqfi: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "chirpqfi: %s\n", e.what());
        return 1;
    }
    return 0;
}
