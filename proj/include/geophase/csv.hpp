// csv.hpp — Deterministic CSV tables: '#'-prefixed metadata block, fixed
// column order, '.' decimal separator, 'NaN' for undefined entries.

#pragma once

#include "geophase/core.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace geophase {

// Shortest round-trip-safe rendering independent of the global locale.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

class CsvTable {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw ConfigError("CsvTable: row width does not match the header");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t size() const { return rows_.size(); }

    void write(std::ostream& os) const {
        for (const auto& [k, v] : meta_) os << "# " << k << " = " << v << '\n';
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                os << render(row[i]);
            }
            os << '\n';
        }
    }

private:
    static std::string render(const Cell& c) {
        if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
        if (const auto* n = std::get_if<long long>(&c)) return std::to_string(*n);
        return quote(std::get<std::string>(c));
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"') out += '"';
            out += ch;
        }
        return out + '"';
    }

    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace geophase
