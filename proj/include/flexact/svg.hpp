#pragma once

#include <string>
#include <utility>
#include <vector>

namespace flexact::svg {

/// One plotted series: a polyline by default, markers only when scatter.
struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool scatter = false;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

/// Writes a standalone SVG line/scatter chart with axes, ticks and a legend.
/// No external dependencies; output is deterministic for identical inputs.
void write_chart(const std::string& path, const ChartSpec& spec,
                 const std::vector<Series>& series);

}  // namespace flexact::svg
