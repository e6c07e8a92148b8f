#include "causalseg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "causalseg/errors.hpp"

namespace causalseg::csv {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    double parsed = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, parsed, std::chars_format::general);
    if (ec != std::errc{} || ptr != end || !std::isfinite(parsed)) return false;
    out = parsed;
    return true;
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            break;
        }
        cells.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

Table read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);

    Table table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_line(line);

    size_t row_index = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw ParseError("row " + std::to_string(row_index) + " of " + path + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
        ++row_index;
    }
    return table;
}

}  // namespace causalseg::csv
