#pragma once

#include <string>
#include <vector>

namespace fraccal {

// Writes content to path atomically (temp file in the same directory, then
// rename), creating parent directories as needed.
void write_file_atomic(const std::string& path, const std::string& content);

// Round-trip-exact decimal rendering of a double (17 significant digits).
std::string format_double(double v);

// Comma-separated table: header row then one row per record. Numeric cells
// are rendered with format_double; the caller supplies already-formatted
// strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
    std::string to_string() const;
};

// Minimal SVG line chart: axes, one polyline, tick labels, axis titles.
// Log-scaled axes transform the data and label ticks with original values.
struct SvgChart {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;

    std::string render(const std::vector<double>& xs, const std::vector<double>& ys) const;
};

}  // namespace fraccal
