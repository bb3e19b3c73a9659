#pragma once

#include <string>
#include <utility>
#include <vector>

namespace itecp {

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line plot: axes, ticks, legend, one polyline per series.
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

}  // namespace itecp
