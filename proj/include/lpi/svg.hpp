#pragma once

// Minimal SVG line charts: polyline series plus optional shaded quartile
// bands, fixed-precision coordinates so identical inputs give identical
// bytes. No external renderer involved.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpi {

struct SvgSeries {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

struct SvgBand {
    std::string color;
    std::vector<std::array<double, 3>> points;  // (x, lo, hi)
};

namespace detail {

inline std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<SvgSeries>& series, const std::vector<SvgBand>& bands,
                            int width = 900, int height = 560) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            x_min = std::min(x_min, x); x_max = std::max(x_max, x);
            y_min = std::min(y_min, y); y_max = std::max(y_max, y);
        }
    for (const auto& b : bands)
        for (auto [x, lo, hi] : b.points) {
            x_min = std::min(x_min, x); x_max = std::max(x_max, x);
            y_min = std::min(y_min, lo); y_max = std::max(y_max, hi);
        }
    if (!(x_min <= x_max)) throw std::invalid_argument("svg chart: no data");
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double ml = 76, mr = 22, mt = 46, mb = 58;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    f << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    f << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"16\">" << title << "</text>\n";

    const int ticks = 5;
    f << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int k = 0; k <= ticks; ++k) {
        double xv = x_min + (x_max - x_min) * k / ticks;
        double yv = y_min + (y_max - y_min) * k / ticks;
        f << "<line x1=\"" << detail::fmt2(px(xv)) << "\" y1=\"" << detail::fmt2(mt) << "\" x2=\""
          << detail::fmt2(px(xv)) << "\" y2=\"" << detail::fmt2(mt + ph)
          << "\" stroke=\"#ddd\"/>\n";
        f << "<line x1=\"" << detail::fmt2(ml) << "\" y1=\"" << detail::fmt2(py(yv)) << "\" x2=\""
          << detail::fmt2(ml + pw) << "\" y2=\"" << detail::fmt2(py(yv))
          << "\" stroke=\"#ddd\"/>\n";
        f << "<text x=\"" << detail::fmt2(px(xv)) << "\" y=\"" << detail::fmt2(mt + ph + 16)
          << "\" text-anchor=\"middle\">" << detail::fmt_tick(xv) << "</text>\n";
        f << "<text x=\"" << detail::fmt2(ml - 6) << "\" y=\"" << detail::fmt2(py(yv) + 4)
          << "\" text-anchor=\"end\">" << detail::fmt_tick(yv) << "</text>\n";
    }
    f << "</g>\n";
    f << "<rect x=\"" << detail::fmt2(ml) << "\" y=\"" << detail::fmt2(mt) << "\" width=\""
      << detail::fmt2(pw) << "\" height=\"" << detail::fmt2(ph)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (const auto& b : bands) {
        if (b.points.empty()) continue;
        f << "<path d=\"";
        for (std::size_t k = 0; k < b.points.size(); ++k)
            f << (k ? " L " : "M ") << detail::fmt2(px(b.points[k][0])) << ' '
              << detail::fmt2(py(b.points[k][2]));
        for (std::size_t k = b.points.size(); k-- > 0;)
            f << " L " << detail::fmt2(px(b.points[k][0])) << ' ' << detail::fmt2(py(b.points[k][1]));
        f << " Z\" fill=\"" << b.color << "\" fill-opacity=\"0.22\" stroke=\"none\"/>\n";
    }
    for (const auto& s : series) {
        f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t k = 0; k < s.points.size(); ++k)
            f << (k ? " " : "") << detail::fmt2(px(s.points[k].first)) << ','
              << detail::fmt2(py(s.points[k].second));
        f << "\"/>\n";
    }

    f << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
    f << "<text x=\"18\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << height / 2 << ")\">" << y_label << "</text>\n";

    double ly = mt + 14;
    for (const auto& s : series) {
        f << "<line x1=\"" << detail::fmt2(ml + 10) << "\" y1=\"" << detail::fmt2(ly - 4)
          << "\" x2=\"" << detail::fmt2(ml + 34) << "\" y2=\"" << detail::fmt2(ly - 4)
          << "\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"/>\n";
        f << "<text x=\"" << detail::fmt2(ml + 40) << "\" y=\"" << detail::fmt2(ly)
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
        ly += 16;
    }
    f << "</svg>\n";
}

}  // namespace lpi
