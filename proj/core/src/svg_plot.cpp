// SPDX-License-Identifier: Apache-2.0
#include "plclab/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plclab {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 480;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 50;
constexpr double kBottom = 60;

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

std::string fixed(double v, int precision) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  if (ec != std::errc{}) return "0";
  std::string s(buf, end);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, s.front() == '-' ? 1 : 0);
  }
  return s;
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

// Tick step of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double m = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
  return m * mag;
}

int decimals_for(double step) {
  return step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = 0.0;
  double y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: x/y length mismatch");
    for (double v : s.x) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    for (double v : s.y) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0;
    x_hi = 1;
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1;
  if (!std::isfinite(y_hi) || !(y_hi > y_lo)) y_hi = y_lo + 1;

  const double x_step = nice_step(x_hi - x_lo, 8);
  const double y_step = nice_step(y_hi - y_lo, 6);
  y_hi = std::ceil(y_hi / y_step) * y_step;
  y_lo = std::floor(y_lo / y_step) * y_step;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
         "\" height=\"" + fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) + " " +
         fixed(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fixed(kLeft + pw / 2, 1) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(chart.title) + "</text>\n";

  // Grid and ticks.
  const int x_dec = decimals_for(x_step);
  for (double x = std::ceil(x_lo / x_step) * x_step; x <= x_hi + 1e-9 * x_step; x += x_step) {
    const std::string X = fixed(px(x), 1);
    svg += "<line x1=\"" + X + "\" y1=\"" + fixed(kTop, 1) + "\" x2=\"" + X + "\" y2=\"" +
           fixed(kTop + ph, 1) + "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + X + "\" y=\"" + fixed(kTop + ph + 18, 1) +
           "\" text-anchor=\"middle\">" + fixed(x, x_dec) + "</text>\n";
  }
  const int y_dec = decimals_for(y_step);
  for (double y = y_lo; y <= y_hi + 1e-9 * y_step; y += y_step) {
    const std::string Y = fixed(py(y), 1);
    svg += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + Y + "\" x2=\"" + fixed(kLeft + pw, 1) +
           "\" y2=\"" + Y + "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + fixed(kLeft - 8, 1) + "\" y=\"" + Y +
           "\" text-anchor=\"end\" dominant-baseline=\"middle\">" + fixed(y, y_dec) + "</text>\n";
  }
  svg += "<rect x=\"" + fixed(kLeft, 1) + "\" y=\"" + fixed(kTop, 1) + "\" width=\"" + fixed(pw, 1) +
         "\" height=\"" + fixed(ph, 1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fixed(kLeft + pw / 2, 1) + "\" y=\"" + fixed(kHeight - 15, 1) +
         "\" text-anchor=\"middle\">" + escape(chart.x_label) + "</text>\n";
  svg += "<text transform=\"translate(22 " + fixed(kTop + ph / 2, 1) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(chart.y_label) + "</text>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const std::string color = kPalette[i % kPalette.size()];
    const bool dashed = i >= kPalette.size();
    std::string points;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (k) points += ' ';
      points += fixed(px(s.x[k]), 2) + "," + fixed(py(s.y[k]), 2);
    }
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"" +
           (dashed ? " stroke-dasharray=\"6 3\"" : "") + " points=\"" + points + "\"/>\n";
    const double ly = kTop + 10 + 18 * static_cast<double>(i);
    svg += "<line x1=\"" + fixed(kLeft + pw + 12, 1) + "\" y1=\"" + fixed(ly, 1) + "\" x2=\"" +
           fixed(kLeft + pw + 36, 1) + "\" y2=\"" + fixed(ly, 1) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"" + (dashed ? " stroke-dasharray=\"6 3\"" : "") + "/>\n";
    svg += "<text x=\"" + fixed(kLeft + pw + 42, 1) + "\" y=\"" + fixed(ly, 1) +
           "\" dominant-baseline=\"middle\">" + escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace plclab
