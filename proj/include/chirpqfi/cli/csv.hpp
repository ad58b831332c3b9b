#pragma once

#include <chirpqfi/config.hpp>
#include <chirpqfi/error.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace chirpqfi::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Numeric output table; every row has one value per column.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// One `key=value` line per entry in key order.
inline std::string canonical_text(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

inline std::string config_hash(const std::string& canonical) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    return buf;
}

inline std::string config_hash(const KeyValues& kv) { return config_hash(canonical_text(kv)); }

/// RFC 4180 field: quoted (with doubled quotes) when it holds a comma,
/// quote, CR or LF.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string format_value(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Comment prologue (tool version, config hash, the configuration itself),
/// header row, data rows.
inline std::string render_csv(const Table& t, const KeyValues& config) {
    std::string out = std::string("# chirpqfi ") + kToolVersion + "\n";
    out += "# config_hash: " + config_hash(config) + "\n";
    for (const auto& [k, v] : config) out += "# " + k + " = " + v + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
    out += "\n";
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw Error(ErrorKind::InvalidArgument, "row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_value(row[i]);
        out += "\n";
    }
    return out;
}

/// Writes through a sibling temporary file and a rename, so `path` either
/// keeps its old content or receives the complete new one.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorKind::IoError, "cannot create directory " + path.parent_path().string());
    }
    const fs::path tmp = path.string() + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << content;
        f.close();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot move output into place at " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace chirpqfi::cli
