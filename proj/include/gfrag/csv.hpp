#pragma once

/**
 * @file csv.hpp
 * @brief RFC 4180 table output with 17 significant digits.
 */

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gfrag/errors.hpp"

namespace gfrag {

class IoError : public Error {
public:
    using Error::Error;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t k = 0; k < t.header.size(); ++k) {
        if (k) out += ',';
        out += csv_field(t.header[k]);
    }
    out += "\r\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (row.size() != t.header.size())
            throw InvalidInput("emit_csv: row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                               " fields, header has " + std::to_string(t.header.size()));
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ',';
            out += format_double(row[k]);
        }
        out += "\r\n";
    }
    return out;
}

inline void emit_csv(const Table& t, const std::string& path) {
    const std::string text = to_csv(t);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("failed writing " + path);
}

}  // namespace gfrag
