#pragma once

#include <string>
#include <utility>
#include <vector>

namespace eb::svg {

struct Series {
  std::vector<std::pair<double, double>> points;
  std::string color = "#5050c8";
  double stroke_width = 1.5;
  bool markers = false;  // circles instead of / in addition to the line
  std::string name;      // legend entry when non-empty
};

// Minimal static line/scatter chart; enough for quick visual checks of the
// ROC, error-decay and prediction outputs without plotting tooling.
std::string render_chart(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<Series>& series);

}  // namespace eb::svg
