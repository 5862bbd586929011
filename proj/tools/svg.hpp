#pragma once

// Self-contained SVG plots. Every plotted value is also written as a data-*
// attribute on its element, so numbers can be checked without rendering.

#include <string>
#include <utility>
#include <vector>

#include "dimsig/perturbation.hpp"

namespace dimsig::plot {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

struct Box {
  double x = 0.0;
  Stats stats;
};

std::string box_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Box>& boxes);

struct Bar {
  double lo = 0.0;
  double hi = 0.0;
  double count = 0.0;
};

// Bars plus an optional vertical marker (e.g. the original value).
std::string histogram_chart(const std::string& title, const std::string& x_label,
                            const std::vector<Bar>& bars, double marker);

// One spoke per label; every series holds one value in [0, 1] per spoke.
struct RadarSeries {
  std::string name;
  std::vector<double> values;
};

std::string radar_chart(const std::string& title, const std::vector<std::string>& spokes,
                        const std::vector<RadarSeries>& series);

}  // namespace dimsig::plot
