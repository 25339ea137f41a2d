#include "drspcrl/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace drspcrl {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
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

} // namespace

ChartAxes chart_extent(const std::vector<ChartSeries>& series) {
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    auto take_y = [&](double v) {
        if (std::isfinite(v)) {
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    };
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            take_y(s.y[i]);
            if (!s.lo.empty()) {
                take_y(s.lo[i]);
                take_y(s.hi[i]);
            }
        }
    }
    if (!std::isfinite(x0)) {
        return {};
    }
    if (!std::isfinite(y0)) {
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 == x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 == y0) {
        const double pad = std::max(std::abs(y0) * 0.05, 0.5);
        y0 -= pad;
        y1 += pad;
    }
    return {x0, x1, y0, y1};
}

std::string render_line_chart(const std::vector<ChartSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.lo.size() != s.hi.size() ||
            (!s.lo.empty() && s.lo.size() != s.y.size())) {
            throw std::invalid_argument("render_line_chart: series '" + s.name + "' has ragged columns");
        }
    }
    const ChartAxes ax = chart_extent(series);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - ax.x_min) / (ax.x_max - ax.x_min) * pw; };
    auto py = [&](double y) { return kTop + (ax.y_max - y) / (ax.y_max - ax.y_min) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(title) << "</text>\n";
    svg << "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n";
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw)
        << "\" y2=\"" << num(kTop + ph) << "\"/>\n";
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
        << num(kTop + ph) << "\"/>\n";
    svg << "</g>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = ax.x_min + (ax.x_max - ax.x_min) * i / 4.0;
        const double yv = ax.y_min + (ax.y_max - ax.y_min) * i / 4.0;
        svg << "<text class=\"xtick\" x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 16)
            << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
        svg << "<text class=\"ytick\" x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
            << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
        svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft + pw)
            << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#eee\"/>\n";
    }
    svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
        << escape(x_label) << "</text>\n";
    svg << "<text transform=\"translate(16 " << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
        if (!s.lo.empty()) {
            svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                svg << num(px(s.x[i])) << ',' << num(py(s.hi[i])) << ' ';
            }
            for (std::size_t i = s.x.size(); i-- > 0;) {
                svg << num(px(s.x[i])) << ',' << num(py(s.lo[i])) << ' ';
            }
            svg << "\"/>\n";
        }
        svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isfinite(s.y[i])) {
                svg << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            }
        }
        svg << "\"/>\n";
        const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
        svg << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw + 32)
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(kLeft + pw + 38) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace drspcrl
