#pragma once

#include <string>
#include <vector>

namespace scramble {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
  bool markers = false;
  bool dashed = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 640;
  int height = 420;
};

/// Standalone SVG line plot. Non-finite points are skipped.
std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& options);

}  // namespace scramble
