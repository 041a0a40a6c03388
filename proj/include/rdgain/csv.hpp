#pragma once

// Minimal CSV emission and parsing: header row, comma separator, LF endings,
// doubles printed in shortest round-trip form so they re-parse bit-exactly.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rdgain/errors.hpp"

namespace rdgain::csv {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("csv: cannot format value");
    return {buf.data(), ptr};
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty() || s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError("csv: not a number: '" + std::string(s) + "'");
    }
    return v;
}

/// Row-oriented CSV text builder.
class Writer {
public:
    explicit Writer(const std::vector<std::string>& header) : columns_(header.size()) { emit(header); }

    Writer& row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        return row(cells);
    }

    Writer& row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw Error("csv: row width does not match header");
        emit(cells);
        return *this;
    }

    [[nodiscard]] const std::string& str() const noexcept { return text_; }

private:
    void emit(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> cells;

    [[nodiscard]] std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw ValidationError("csv: no column '" + std::string(name) + "'");
    }

    [[nodiscard]] std::vector<double> numeric_column(std::string_view name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(cells.size());
        for (const auto& r : cells) out.push_back(parse_double(r.at(c)));
        return out;
    }
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline Table parse(const std::string& text) {
    Table t;
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw ValidationError("csv: empty input");
    t.header = split_line(line);
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != t.header.size()) throw ValidationError("csv: ragged row");
        t.cells.push_back(std::move(cells));
    }
    return t;
}

inline Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("csv: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace rdgain::csv
