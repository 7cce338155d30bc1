#include "eb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace eb::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_chart(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<Series>& series) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!(x_lo < x_hi)) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (!(y_lo < y_hi)) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";

  // Frame and ticks.
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(plot_w) +
         "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double fx = x_lo + (x_hi - x_lo) * t / 5.0;
    const double fy = y_lo + (y_hi - y_lo) * t / 5.0;
    out += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" +
           num(px(fx)) + "\" y2=\"" + num(kTop + plot_h + 4) + "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kTop + plot_h + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" + num(fx) +
           "</text>\n";
    out += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(py(fy)) + "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(fy) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(fy) +
           "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" + x_label +
         "</text>\n";
  out += "<text x=\"16\" y=\"" + num(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" transform=\""
         "rotate(-90 16 " + num(kTop + plot_h / 2) + ")\">" + y_label + "</text>\n";

  for (const Series& s : series) {
    if (s.points.empty()) continue;
    if (!s.markers) {
      std::string path = "M";
      for (const auto& [x, y] : s.points) {
        path += " " + num(px(x)) + "," + num(py(y));
      }
      out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"" +
             num(s.stroke_width) + "\"/>\n";
    } else {
      for (const auto& [x, y] : s.points) {
        out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" +
               s.color + "\" fill-opacity=\"0.7\"/>\n";
      }
    }
  }

  double legend_y = kTop + 14;
  for (const Series& s : series) {
    if (s.name.empty()) continue;
    out += "<line x1=\"" + num(kLeft + plot_w - 120) + "\" y1=\"" + num(legend_y - 4) +
           "\" x2=\"" + num(kLeft + plot_w - 100) + "\" y2=\"" + num(legend_y - 4) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kLeft + plot_w - 94) + "\" y=\"" + num(legend_y) +
           "\" font-size=\"11\" font-family=\"sans-serif\">" + s.name + "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace eb::svg
