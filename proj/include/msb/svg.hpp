#pragma once

// Self-contained SVG bar chart; enough to eyeball a posterior pmf without
// any plotting dependency.

#include <algorithm>
#include <string>
#include <vector>

#include "msb/csv.hpp"
#include "msb/numerics.hpp"

namespace msb {

namespace detail {

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

inline std::string svg_bar_chart(const Vector& values, const std::vector<std::string>& bar_labels,
                                 const std::string& title) {
    const int n = static_cast<int>(values.size());
    const double bar_width = 24.0, gap = 4.0;
    const double margin_left = 50.0, margin_right = 15.0, margin_top = 40.0, margin_bottom = 40.0;
    const double plot_height = 260.0;
    const double width = margin_left + margin_right + n * (bar_width + gap);
    const double height = margin_top + plot_height + margin_bottom;
    double max_value = 0.0;
    for (double v : values) max_value = std::max(max_value, v);
    if (max_value <= 0.0) max_value = 1.0;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
           "\" height=\"" + format_double(height) + "\">\n";
    svg += "<text x=\"" + format_double(width / 2) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           detail::escape_xml(title) + "</text>\n";
    // axes
    svg += "<line x1=\"" + format_double(margin_left) + "\" y1=\"" + format_double(margin_top) +
           "\" x2=\"" + format_double(margin_left) + "\" y2=\"" +
           format_double(margin_top + plot_height) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(margin_left) + "\" y1=\"" +
           format_double(margin_top + plot_height) + "\" x2=\"" + format_double(width - margin_right) +
           "\" y2=\"" + format_double(margin_top + plot_height) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(margin_left - 6) + "\" y=\"" + format_double(margin_top + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           format_double(max_value) + "</text>\n";
    svg += "<text x=\"" + format_double(margin_left - 6) + "\" y=\"" +
           format_double(margin_top + plot_height) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";

    const int label_stride = std::max(1, n / 15);
    for (int i = 0; i < n; ++i) {
        const double h = plot_height * values[i] / max_value;
        const double x = margin_left + gap / 2 + i * (bar_width + gap);
        svg += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(margin_top + plot_height - h) +
               "\" width=\"" + format_double(bar_width) + "\" height=\"" + format_double(h) +
               "\" fill=\"steelblue\"/>\n";
        if (i % label_stride == 0) {
            svg += "<text x=\"" + format_double(x + bar_width / 2) + "\" y=\"" +
                   format_double(margin_top + plot_height + 14) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
                   detail::escape_xml(i < static_cast<int>(bar_labels.size()) ? bar_labels[i]
                                                                              : std::to_string(i + 1)) +
                   "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace msb
