/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

struct SvgSeries {
    std::string name;
    std::vector<double> values;  // x is the 1-based index
};

namespace svgdetail {

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace svgdetail

/// Minimal line chart: series are drawn over their 1-based index. Horizontal
/// guide lines (e.g. confidence bounds) are dashed.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::vector<SvgSeries>& series,
                             const std::vector<double>& guides = {}) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    const double width = 720, height = 400;
    const double ml = 60, mr = 20, mt = 40, mb = 40;

    double lo = 0.0, hi = 1.0;
    bool first = true;
    std::size_t max_n = 0;
    for (const auto& s : series) {
        max_n = std::max(max_n, s.values.size());
        for (double v : s.values) {
            if (std::isnan(v)) continue;
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    for (double g : guides) {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto x_of = [&](std::size_t i) {
        if (max_n <= 1) return ml;
        return ml + (width - ml - mr) * static_cast<double>(i) / static_cast<double>(max_n - 1);
    };
    auto y_of = [&](double v) { return mt + (height - mt - mb) * (hi - v) / (hi - lo); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    out << "<text x=\"8\" y=\"" << y_of(hi - pad) << "\" font-size=\"11\">"
        << svgdetail::fmt(hi - pad) << "</text>\n";
    out << "<text x=\"8\" y=\"" << y_of(lo + pad) << "\" font-size=\"11\">"
        << svgdetail::fmt(lo + pad) << "</text>\n";

    for (double g : guides) {
        out << "<line x1=\"" << ml << "\" y1=\"" << y_of(g) << "\" x2=\"" << width - mr
            << "\" y2=\"" << y_of(g) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = svgdetail::kPalette[si % 5];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (std::isnan(s.values[i])) continue;
            out << svgdetail::fmt(x_of(i)) << ',' << svgdetail::fmt(y_of(s.values[i])) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - mr - 120 << "\" y=\"" << mt + 16 * (si + 1)
            << "\" font-size=\"12\" fill=\"" << color << "\">" << s.name << "</text>\n";
    }
    out << "</svg>\n";
}

/// Heatmap of a square matrix; NaN cells are grey, values map lo->white,
/// hi->dark red.
inline void write_heatmap(const std::string& path, const std::string& title,
                          const std::vector<std::vector<double>>& matrix, double lo, double hi) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    const std::size_t n = matrix.size();
    const double cell = std::max(4.0, std::min(20.0, 560.0 / std::max<std::size_t>(n, 1)));
    const double ml = 50, mt = 40;
    const double width = ml + cell * static_cast<double>(n) + 20;
    const double height = mt + cell * static_cast<double>(n) + 20;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < matrix[r].size(); ++c) {
            const double v = matrix[r][c];
            std::string fill = "#cccccc";
            if (!std::isnan(v)) {
                double t = (v - lo) / (hi - lo);
                t = std::clamp(t, 0.0, 1.0);
                const int red = 255;
                const int gb = static_cast<int>(std::lround(255.0 * (1.0 - t)));
                char buf[10];
                std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", red, gb, gb);
                fill = buf;
            }
            out << "<rect x=\"" << svgdetail::fmt(ml + cell * static_cast<double>(c)) << "\" y=\""
                << svgdetail::fmt(mt + cell * static_cast<double>(r)) << "\" width=\""
                << svgdetail::fmt(cell) << "\" height=\"" << svgdetail::fmt(cell) << "\" fill=\""
                << fill << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace driftbench
