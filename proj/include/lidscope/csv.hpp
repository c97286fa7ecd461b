#pragma once

// Plain-text tables: estimate vectors (`row,estimate`) and metric logs
// (`step,<name>...`).

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lidscope/error.hpp"

namespace lidscope {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw DataError("cannot format value");
    return std::string(buf, end);
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        cells.emplace_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InputError(context + ": not a number: '" + std::string(s) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& context) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InputError(context + ": not an integer: '" + std::string(s) + "'");
    return v;
}

inline void write_estimates_csv(std::ostream& out, std::span<const double> values) {
    out << "row,estimate\n";
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
}

inline void write_estimates_csv(const std::filesystem::path& path, std::span<const double> values) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_estimates_csv(out, values);
}

/// Reads a `row,estimate` file; rows must be 0, 1, 2, ... in order.
inline std::vector<double> read_estimates_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty estimate file");
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "row" || header[1] != "estimate")
        throw InputError(path.string() + ": expected header 'row,estimate'");
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) throw InputError(ctx + ": expected 2 columns");
        if (parse_int(cells[0], ctx) != static_cast<std::int64_t>(values.size()))
            throw InputError(ctx + ": rows must be numbered consecutively from 0");
        values.push_back(parse_double(cells[1], ctx));
    }
    return values;
}

using MetricRow = std::map<std::string, double>;

/// Metrics keyed by step. Empty cells are treated as missing values.
inline std::map<std::int64_t, MetricRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty metrics file");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "step")
        throw InputError(path.string() + ": metrics header must start with 'step'");
    std::map<std::int64_t, MetricRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw InputError(ctx + ": column count differs from header");
        const auto step = parse_int(cells[0], ctx);
        auto [it, inserted] = rows.try_emplace(step);
        if (!inserted) throw InputError(ctx + ": duplicate step " + std::to_string(step));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (!cells[c].empty()) it->second[header[c]] = parse_double(cells[c], ctx);
        }
    }
    return rows;
}

}  // namespace lidscope
