#pragma once

#include <string>
#include <vector>

// Minimal deterministic SVG charts (no timestamps, fixed palette).

namespace sharpkit::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;  // optional error bars
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 860;
  int height = 520;
};

std::string render_line_chart(const Chart& chart);
void write_line_chart(const std::string& path, const Chart& chart);

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<double> errors;  // optional, same length as values
  int width = 860;
  int height = 520;
};

std::string render_bar_chart(const BarChart& chart);
void write_bar_chart(const std::string& path, const BarChart& chart);

// Stacks several rendered charts into one SVG document.
void write_panel_svg(const std::string& path, const std::vector<std::string>& panels,
                     int panel_width, int panel_height);

}  // namespace sharpkit::svg
