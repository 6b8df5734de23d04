#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsvbs {

// Minimal static line-chart writer. CSVs are the canonical output; these
// charts exist so a run can be eyeballed without external tooling.
struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<ChartSeries>& series) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    const double width = 720, height = 440;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                x_min = x_max = s.x[i];
                y_min = y_max = s.y[i];
                first = false;
            }
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
        }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;

    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        return std::string(buf);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write chart: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title
        << "</text>\n";

    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double xv = x_min + (x_max - x_min) * i / ticks;
        const double yv = y_min + (y_max - y_min) * i / ticks;
        out << "<line x1='" << px(xv) << "' y1='" << height - mb << "' x2='" << px(xv) << "' y2='"
            << mt << "' stroke='#eeeeee'/>\n"
            << "<text x='" << px(xv) << "' y='" << height - mb + 16
            << "' text-anchor='middle' font-size='11'>" << fmt(xv) << "</text>\n"
            << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << width - mr << "' y2='"
            << py(yv) << "' stroke='#eeeeee'/>\n"
            << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11'>" << fmt(yv) << "</text>\n";
    }
    out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n"
        << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << ml << "' y2='" << mt
        << "' stroke='black'/>\n"
        << "<text x='" << width / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n"
        << "<text x='16' y='" << height / 2 << "' text-anchor='middle' font-size='12' "
        << "transform='rotate(-90 16 " << height / 2 << ")'>" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = palette[si % 6];
        // subsample long series; the chart has fewer pixels than slots anyway
        const std::size_t step = std::max<std::size_t>(1, s.x.size() / 1500);
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); i += step)
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        if (!s.x.empty() && (s.x.size() - 1) % step != 0)
            out << px(s.x.back()) << "," << py(s.y.back());
        out << "'/>\n";
        out << "<text x='" << width - mr - 140 << "' y='" << mt + 16 + 16 * si
            << "' font-size='12' fill='" << color << "'>" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace bsvbs
