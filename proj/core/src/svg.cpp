#include "itecp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "itecp/errors.hpp"

namespace itecp {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
    if (series.empty()) throw DataError("svg: no series to plot");

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    if (!(x_min <= x_max)) throw DataError("svg: no finite points to plot");
    if (x_min == x_max) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_min == y_max) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const double width = 640, height = 420;
    const double ml = 70, mr = 160, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
    const auto sy = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
       << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"20\" font-size=\"14\" "
          "text-anchor=\"middle\" font-family=\"sans-serif\">"
       << escape(title) << "</text>\n";

    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
       << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << mt + ph << "\" stroke=\"black\"/>\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = x_min + (x_max - x_min) * i / ticks;
        const double fy = y_min + (y_max - y_min) * i / ticks;
        os << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << sx(fx)
           << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 18
           << "\" font-size=\"10\" text-anchor=\"middle\" font-family=\"sans-serif\">"
           << num(fx) << "</text>\n";
        os << "<line x1=\"" << ml - 4 << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml
           << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 3
           << "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">"
           << num(fy) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
       << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
       << escape(x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << mt + ph / 2
       << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "transform=\"rotate(-90 16 "
       << mt + ph / 2 << ")\">" << escape(y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        os << "<polyline fill=\"none\" stroke=\"" << ser.color
           << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : ser.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            os << num(sx(x)) << "," << num(sy(y)) << " ";
        }
        os << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        os << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\""
           << ml + pw + 34 << "\" y2=\"" << ly << "\" stroke=\"" << ser.color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4
           << "\" font-size=\"11\" font-family=\"sans-serif\">" << escape(ser.label)
           << "</text>\n";
    }
    os << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw DataError("svg: cannot write '" + path + "'");
    out << os.str();
}

}  // namespace itecp
