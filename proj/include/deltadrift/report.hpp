#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"

namespace deltadrift {

// 17 significant digits: enough to round-trip an IEEE double, and the fixed
// formatting that makes identical runs byte-identical.
inline std::string format_sig17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Minimal RFC-4180-style CSV: one header row, LF line endings, no quoting
// needed because every cell is a number or a bare identifier.
inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ValidationError("cannot open output file \"" + path + "\"");
    for (size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << row[i];
        os << "\n";
    }
    if (!os)
        throw ValidationError("failed writing \"" + path + "\"");
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ValidationError("cannot open output file \"" + path + "\"");
    os << doc.dump(2) << "\n";
    if (!os)
        throw ValidationError("failed writing \"" + path + "\"");
}

// Machine-readable failure record (printed to stderr by the CLI).
inline nlohmann::ordered_json error_record(const std::string& type,
                                           const std::string& message) {
    nlohmann::ordered_json rec;
    rec["error"]["type"] = type;
    rec["error"]["message"] = message;
    return rec;
}

} // namespace deltadrift
