#pragma once

#include <string>
#include <vector>

namespace biceit {

struct PlotSeries {
  std::string label;
  std::vector<double> y;
  std::string color = "#1f6fb2";
  bool dashed = false;
};

// Minimal deterministic line plot, shared x axis. No timestamps, no
// randomness: identical inputs give identical bytes.
std::string render_svg_plot(const std::string& title,
                            const std::string& x_label,
                            const std::vector<double>& x,
                            const std::vector<PlotSeries>& series);

}  // namespace biceit
