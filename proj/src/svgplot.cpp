#include "phasered/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace phasered {

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::vector<double>& x,
                    const std::vector<std::vector<double>>& columns,
                    const std::vector<std::string>& labels) {
    const int W = 720, H = 480;
    const int ml = 70, mr = 20, mt = 36, mb = 48;
    const double pw = W - ml - mr, ph = H - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (const auto& col : columns)
        for (double v : col) {
            if (!std::isfinite(v)) continue;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";

    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", xv);
        out << buf << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">";
        std::snprintf(buf, sizeof(buf), "%.3g", yv);
        out << buf << "</text>\n";
        if (i > 0) {
            out << "<line x1=\"" << ml << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml + pw
                << "\" y2=\"" << sy(yv)
                << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
        }
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << x_label << "</text>\n";

    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[c % 4]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < x.size(); ++j) {
            double v = columns[c][j];
            if (!std::isfinite(v)) v = 0.0;
            v = std::clamp(v, ymin, ymax);
            out << sx(x[j]) << "," << sy(v) << " ";
        }
        out << "\"/>\n";
        if (c < labels.size()) {
            out << "<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 16 * (int)c
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
                << "fill=\"" << palette[c % 4] << "\">" << labels[c] << "</text>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace phasered
