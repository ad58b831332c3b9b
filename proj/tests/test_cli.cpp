#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chirpqfi/cli/csv.hpp>
#include <chirpqfi/cli/presets.hpp>
#include <chirpqfi/cli/scenario.hpp>

#include "support.hpp"

#include <filesystem>

using namespace chirpqfi;
using namespace chirpqfi::cli;
using support::kind_of;
using support::rel_diff;

namespace fs = std::filesystem;

TEST_SUITE("configuration") {
    TEST_CASE("flat key-value parsing") {
        const auto kv = parse_key_values("# comment\nenvelope = gaussian\n\n gamma_t=2 # trailing\nmode=asymptotic\n");
        CHECK(kv.size() == 3);
        CHECK(kv.at("gamma_t") == "2");
        CHECK(kind_of([] { parse_key_values("gamma_t 2\n"); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { parse_key_values("= 2\n"); }) == ErrorKind::ConfigError);
    }

    TEST_CASE("unknown and misplaced keys are rejected") {
        CHECK(kind_of([] { scenario_from_key_values({{"gamma_tt", "2"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"modulation", "none"}, {"alpha", "1"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"mode", "asymptotic"}, {"t_count", "3"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"mode", "finite_time"}, {"j_max", "3"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"mode", "sideways"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"gamma", "-1"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"mode", "mode_cfi"}, {"j_max", "2.5"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { scenario_from_key_values({{"mode", "mode_cfi"}, {"basis", "fourier"}}); }) == ErrorKind::ConfigError);
    }

    TEST_CASE("defaults and round trip") {
        const auto s = scenario_from_key_values({{"mode", "mode_cfi"}});
        CHECK(s.modal.j_max == 30);
        CHECK(s.modal.basis == BasisKind::HermiteGauss);
        const KeyValues kv{{"envelope", "exponential"}, {"gamma_t", "4"},   {"modulation", "quadratic"}, {"k", "1"},
                           {"gamma", "5"},              {"delta", "0.5"},   {"mode", "finite_time"},    {"t_start", "-2"},
                           {"t_stop", "48"},            {"t_count", "10"}, {"dt", "0.002"}};
        CHECK(to_key_values(scenario_from_key_values(kv)) == kv);
    }
}

TEST_SUITE("scenarios") {
    TEST_CASE("asymptotic gaussian row matches the closed form") {
        const auto t = run_config({{"gamma_t", "2"}, {"gamma", "5"}, {"mode", "asymptotic"}});
        const std::vector<std::string> cols{"classical", "quantum", "total", "p_loss"};
        CHECK(t.columns == cols);
        REQUIRE(t.rows.size() == 1);
        const auto c = gaussian_closed_forms(5.0, 0.25);
        CHECK(rel_diff(t.rows[0][0], c.classical) < 1e-6);
        CHECK(rel_diff(t.rows[0][1], c.quantum) < 1e-6);
        CHECK(rel_diff(t.rows[0][3], c.p_loss) < 1e-6);
    }

    TEST_CASE("closed form without environment coupling has zero classical part") {
        for (const char* env : {"gaussian", "exponential"}) {
            const auto t = run_config({{"envelope", env}, {"gamma_t", "2"}, {"gamma", "0"}, {"mode", "closed_form"}});
            CHECK(t.rows[0][0] == 0.0);
            CHECK(t.rows[0][1] > 0.0);
        }
        CHECK(kind_of([] { run_config({{"modulation", "sinusoidal"}, {"omega", "1"}, {"mode", "closed_form"}}); }) ==
              ErrorKind::InvalidArgument);
    }

    TEST_CASE("finite time rows are zero before the pulse arrives") {
        const auto t = run_config({{"envelope", "exponential"}, {"gamma_t", "1"}, {"gamma", "5"}, {"mode", "finite_time"},
                                   {"t_start", "-3"}, {"t_stop", "20"}, {"t_count", "24"}});
        CHECK(t.columns.front() == "t");
        CHECK(t.rows.size() == 24);
        CHECK(t.rows.front()[0] == doctest::Approx(-3.0));
        int zeros = 0;
        for (const auto& r : t.rows)
            if (r[0] < 0.0) {
                ++zeros;
                CHECK(r[1] == 0.0);
                CHECK(r[2] == 0.0);
                CHECK(r[4] == 0.0);
            }
        CHECK(zeros >= 3);
        CHECK(t.rows.back()[3] > 0.0);
    }

    TEST_CASE("mode table") {
        const auto t = run_config({{"gamma_t", "2.5"}, {"gamma", "5"}, {"mode", "mode_cfi"}, {"j_max", "5"}});
        CHECK(t.rows.size() == 6);
        for (std::size_t j = 0; j < t.rows.size(); ++j) {
            CHECK(t.rows[j][0] == static_cast<double>(j));
            CHECK(t.rows[j][3] <= 1.0 + 1e-6);
        }
    }
}

TEST_SUITE("sweeps") {
    TEST_CASE("axis parsing") {
        const auto a = parse_axis("gamma_t:8:0.5:4");
        CHECK(a.key == "gamma_t");
        const std::vector<double> v{0.5, 3.0, 5.5, 8.0};
        CHECK(a.values() == v);
        CHECK(kind_of([] { parse_axis("gamma_t:1:2"); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { parse_axis("mode:1:2:3"); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { parse_axis("gamma_t:1:2:1"); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { parse_axis("gamma_t:1:x:3"); }) == ErrorKind::ConfigError);
    }

    TEST_CASE("rows are ordered lexicographically by the swept values") {
        const KeyValues kv{{"gamma", "5"}, {"sweep", "gamma_t:4:1:3"}, {"sweep2", "gamma:0:2:2"}};
        const auto t = run_config(kv, 3);
        CHECK(t.columns[0] == "gamma_t");
        CHECK(t.columns[1] == "gamma");
        REQUIRE(t.rows.size() == 6);
        for (std::size_t i = 1; i < t.rows.size(); ++i)
            CHECK(std::lexicographical_compare(t.rows[i - 1].begin(), t.rows[i - 1].begin() + 2, t.rows[i].begin(),
                                               t.rows[i].begin() + 2));
        CHECK(t.rows[0][2] == 0.0);
    }

    TEST_CASE("output is identical for any thread count") {
        const KeyValues kv{{"modulation", "sinusoidal"}, {"omega", "1"}, {"gamma", "5"}, {"sweep", "gamma_t:0.5:3:6"}};
        const auto one = render_csv(run_config(kv, 1), kv);
        CHECK(render_csv(run_config(kv, 4), kv) == one);
        CHECK(render_csv(run_config(kv, 1), kv) == one);
    }

    TEST_CASE("a failing point names its row") {
        const KeyValues kv{{"sweep", "gamma_t:-1:1:3"}};
        try {
            run_config(kv, 2);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("sweep row 0 (gamma_t=-1)") != std::string::npos);
        }
        CHECK(kind_of([] { sweep_from_key_values({{"sweep2", "gamma:0:1:2"}}); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { sweep_from_key_values({{"sweep", "gamma:0:1:2"}, {"sweep2", "gamma:0:1:2"}}); }) ==
              ErrorKind::ConfigError);
    }
}

TEST_SUITE("files") {
    TEST_CASE("CSV quoting and prologue") {
        CHECK(csv_field("plain") == "plain");
        CHECK(csv_field("a,b") == "\"a,b\"");
        CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
        CHECK(csv_field("two\nlines") == "\"two\nlines\"");
        const Table t{{"x", "y,z"}, {{1.0, 0.1}}};
        const auto csv = render_csv(t, {{"gamma", "5"}});
        CHECK(csv.rfind("# chirpqfi 0.1.0\n# config_hash: fnv1a64:", 0) == 0);
        CHECK(csv.find("# gamma = 5\nx,\"y,z\"\n1,0.10000000000000001\n") != std::string::npos);
        CHECK(kind_of([] { render_csv({{"a"}, {{1.0, 2.0}}}, {}); }) == ErrorKind::InvalidArgument);
    }

    TEST_CASE("hash depends on every key") {
        CHECK(config_hash(KeyValues{{"a", "1"}}) != config_hash(KeyValues{{"a", "2"}}));
        CHECK(config_hash(KeyValues{{"a", "1"}}) == config_hash(KeyValues{{"a", "1"}}));
        CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
        CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    }

    TEST_CASE("atomic writes leave no partial file") {
        const fs::path dir = fs::temp_directory_path() / "chirpqfi_test_files";
        fs::remove_all(dir);
        write_file_atomic(dir / "sub" / "out.csv", "hello\n");
        CHECK(read_file(dir / "sub" / "out.csv") == "hello\n");
        CHECK_FALSE(fs::exists(dir / "sub" / "out.csv.partial"));
        fs::create_directories(dir / "blocked.csv");
        CHECK(kind_of([&] { write_file_atomic(dir / "blocked.csv", "x"); }) == ErrorKind::IoError);
        CHECK_FALSE(fs::exists(dir / "blocked.csv.partial"));
        CHECK(kind_of([&] { read_file(dir / "missing"); }) == ErrorKind::IoError);
        fs::remove_all(dir);
    }
}

TEST_SUITE("presets") {
    TEST_CASE("every preset is well formed") {
        for (const auto& name : preset_names()) {
            const auto entries = figure_preset(name);
            CHECK_FALSE(entries.empty());
            for (const auto& e : entries) {
                CHECK(e.file == e.name + ".csv");
                const auto sweep = e.config.count("sweep") ? sweep_from_key_values(e.config) : SweepSpec{e.config, {}};
                CHECK_NOTHROW(scenario_from_key_values(sweep.base));
            }
        }
        CHECK(figure_preset("fig8").size() == 4);
        CHECK(figure_preset("fig3").front().config.at("gamma") == "1");
        CHECK(kind_of([] { figure_preset("fig9"); }) == ErrorKind::UnknownPreset);
    }

    TEST_CASE("manifest round trip and tampering") {
        const auto entries = figure_preset("fig5");
        const auto m = make_manifest("fig5", entries);
        CHECK(m.at("tool_version") == kToolVersion);
        const auto back = entries_from_manifest(nlohmann::json::parse(m.dump()));
        REQUIRE(back.size() == entries.size());
        for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].config == entries[i].config);

        auto changed = m;
        changed["scenarios"][0]["config"]["gamma"] = "4";
        CHECK(kind_of([&] { entries_from_manifest(changed); }) == ErrorKind::ConfigError);
        auto escaped = m;
        escaped["scenarios"][0]["file"] = "../x.csv";
        CHECK(kind_of([&] { entries_from_manifest(escaped); }) == ErrorKind::ConfigError);
        CHECK(kind_of([] { entries_from_manifest(nlohmann::json::object()); }) == ErrorKind::ConfigError);
    }

    TEST_CASE("threads") {
        CHECK(resolve_threads(3u) == 3u);
        CHECK(resolve_threads(std::nullopt) >= 1u);
    }
}
