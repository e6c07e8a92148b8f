#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace causalseg::csv {

// Canonical numeric formatting: shortest representation that round-trips,
// '.' decimal point, no thousands separators.
std::string format_double(double value);

// Strict finite-double parse of a whole cell. Returns false on any trailing
// garbage, empty cell, or non-finite value.
bool parse_double(std::string_view cell, double& out);

std::vector<std::string> split_line(std::string_view line, char delimiter = ',');

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a UTF-8, comma-separated file with a header row. No quoting support;
// the canonical format never needs it.
Table read_table(const std::string& path);

}  // namespace causalseg::csv
