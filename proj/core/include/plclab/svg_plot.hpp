// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace plclab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label = "Average SNR (dB)";
  std::string y_label = "Capacity (bits/slot)";
  std::vector<PlotSeries> series;
};

/// Self-contained SVG document with axes, ticks, a legend and one polyline
/// per series. Output depends only on the input, so it is reproducible.
std::string render_svg(const LineChart& chart);

}  // namespace plclab
