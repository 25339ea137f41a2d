#pragma once

#include <string>
#include <vector>

namespace drspcrl {

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    // Optional band; both empty or both the length of y.
    std::vector<double> lo;
    std::vector<double> hi;
};

struct ChartAxes {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
};

/// Data extent over all points and bands (degenerate ranges are widened).
ChartAxes chart_extent(const std::vector<ChartSeries>& series);

/// Self-contained SVG document: one polyline per series, shaded band where given.
std::string render_line_chart(const std::vector<ChartSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label);

} // namespace drspcrl
