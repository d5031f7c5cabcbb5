#pragma once

#include <string>
#include <vector>

namespace ic {

struct PlotSeries {
  std::string name;
  std::vector<double> y;
};

/// Static SVG line chart, one polyline per series, x = sample index.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

/// Static SVG grouped bar chart: one bar per series within each group.
void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& groups,
                         const std::vector<PlotSeries>& series);

}  // namespace ic
