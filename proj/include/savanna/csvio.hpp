#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace savanna::csvio {

// RFC 4180 quoting: fields holding commas, quotes or newlines are wrapped and
// inner quotes doubled.
std::string quote(const std::string& field);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

// Full-file parser, understands quoted fields; rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::istream& is);

// Whitespace-separated numeric matrix, one row per line (plotting tools eat
// this directly).
void write_matrix(std::ostream& os, const std::vector<std::vector<double>>& m);

// Minimal self-contained heatmap; one rect per cell, linear two-color ramp.
void write_svg_heatmap(std::ostream& os, const std::vector<std::vector<double>>& m,
                       const std::string& title = "");

std::string format_double(double v);

}  // namespace savanna::csvio
