#include "savanna/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace savanna::csvio {

std::string quote(const std::string& field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << quote(fields[i]);
    }
    os << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (is.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                break;
            case '\r':
                break;
            case '\n':
                row.push_back(std::move(field));
                field.clear();
                rows.push_back(std::move(row));
                row.clear();
                any = false;
                break;
            default:
                field += c;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_matrix(std::ostream& os, const std::vector<std::vector<double>>& m) {
    for (const auto& row : m) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ' ';
            os << format_double(row[i]);
        }
        os << '\n';
    }
}

void write_svg_heatmap(std::ostream& os, const std::vector<std::vector<double>>& m,
                       const std::string& title) {
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    const int cell = 12, margin = 20;
    const std::size_t w = 2 * margin + cell * cols;
    const std::size_t h = 2 * margin + cell * rows + (title.empty() ? 0 : 16);
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& r : m)
        for (double v : r) {
            if (first || v < lo) lo = first ? v : std::min(lo, v);
            if (first || v > hi) hi = first ? v : std::max(hi, v);
            first = false;
        }
    if (hi <= lo) hi = lo + 1.0;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\">\n";
    if (!title.empty())
        os << "<text x=\"" << margin << "\" y=\"14\" font-size=\"12\">" << title << "</text>\n";
    const int top = margin + (title.empty() ? 0 : 16);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            const double u = (m[i][j] - lo) / (hi - lo);
            const int r = static_cast<int>(40 + 200 * u);
            const int g = static_cast<int>(60 + 120 * (1.0 - u));
            const int b = static_cast<int>(160 - 120 * u);
            os << "<rect x=\"" << margin + static_cast<int>(j) * cell << "\" y=\""
               << top + static_cast<int>(i) * cell << "\" width=\"" << cell << "\" height=\""
               << cell << "\" fill=\"rgb(" << r << ',' << g << ',' << b << ")\"/>\n";
        }
    os << "</svg>\n";
}

}  // namespace savanna::csvio
