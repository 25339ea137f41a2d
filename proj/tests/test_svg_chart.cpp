#include "drspcrl/svg_chart.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>

using namespace drspcrl;

TEST_CASE("extent covers data and bands") {
    const ChartSeries s{"s", {0, 1, 2, 3}, {1, 2, 3, 4}, {0.5, 1.5, 2.5, 3.5}, {1.5, 2.5, 3.5, 4.5}};
    const ChartAxes ax = chart_extent({s});
    CHECK(ax.x_min == 0.0);
    CHECK(ax.x_max == 3.0);
    CHECK(ax.y_min == 0.5);
    CHECK(ax.y_max == 4.5);
}

TEST_CASE("degenerate and non-finite data") {
    const ChartSeries flat{"flat", {2, 2}, {1, 1}, {}, {}};
    const ChartAxes ax = chart_extent({flat});
    CHECK(ax.x_max > ax.x_min);
    CHECK(ax.y_max > ax.y_min);
    const ChartSeries gaps{"gaps", {0, 1, 2}, {NAN, 3, NAN}, {}, {}};
    const ChartAxes g = chart_extent({gaps});
    CHECK(g.y_min < 3.0);
    CHECK(g.y_max > 3.0);
}

TEST_CASE("rendered document") {
    const ChartSeries a{"a & b", {0, 1, 2}, {1, 2, 3}, {0.8, 1.8, 2.8}, {1.2, 2.2, 3.2}};
    const ChartSeries b{"plain", {0, 1, 2}, {3, 2, 1}, {}, {}};
    const std::string svg = render_line_chart({a, b}, "T <1>", "x", "y");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("class=\"band\"") != std::string::npos);
    CHECK(svg.find("class=\"band\"", svg.find("class=\"band\"") + 1) == std::string::npos);
    CHECK(svg.find("a &amp; b") != std::string::npos);
    CHECK(svg.find("T &lt;1&gt;") != std::string::npos);
    // The lowest tick sits at the band's lower edge and the highest at the upper edge.
    CHECK(svg.find(">0.8<") != std::string::npos);
    CHECK(svg.find(">3.2<") != std::string::npos);
    const ChartSeries ragged{"r", {0, 1}, {1}, {}, {}};
    CHECK_THROWS_AS(render_line_chart({ragged}, "", "", ""), std::invalid_argument);
}
