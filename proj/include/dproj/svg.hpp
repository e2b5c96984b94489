#pragma once

// Minimal SVG emitters for curves and heatmaps. Output is plain text built
// with fixed number formatting so reruns are byte-identical.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dproj::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    double y_min = -0.1;
    double y_max = 1.05;
    std::vector<double> rules;  // horizontal reference lines
    std::vector<Series> series;
};

[[nodiscard]] std::string line_plot(const LinePlot& plot);

struct Heatmap {
    std::string title;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major, row 0 drawn at the top
    std::string x_label;
    std::string y_label;
    /// Polyline overlay in cell coordinates (col, row), e.g. a trajectory.
    std::vector<std::pair<double, double>> path;
    /// Star marker in cell coordinates.
    std::optional<std::pair<double, double>> star;
};

[[nodiscard]] std::string heatmap(const Heatmap& map);

} // namespace dproj::svg
