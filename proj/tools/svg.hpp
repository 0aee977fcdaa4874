#pragma once

#include <string>
#include <vector>

namespace gearmr::cli {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    /// Vertical marker lines at these x positions.
    std::vector<double> markers;
    bool log_y = false;
};

/// Standalone SVG line chart. Long series are reduced to per-pixel min/max
/// pairs so peaks survive.
std::string render_svg(const Chart& chart);

}  // namespace gearmr::cli
