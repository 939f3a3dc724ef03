#ifndef NRFAR_SVG_HPP
#define NRFAR_SVG_HPP

#include <string>
#include <vector>

namespace nrfar {

// One curve over categorical x positions; y and yerr are aligned with
// the chart's x labels (NaN y skips the point).
struct SvgSeries {
  std::string label;
  std::vector<double> y;
  std::vector<double> yerr;
  std::string color = "#1f6fb4";
};

// Self-contained SVG line chart with mean +/- error bars. y axis spans
// [0, 1] (balanced accuracy).
std::string svg_line_chart(const std::string& title,
                           const std::vector<std::string>& x_labels,
                           const std::string& x_title, const std::string& y_title,
                           const std::vector<SvgSeries>& series, int width = 720,
                           int height = 480);

}  // namespace nrfar

#endif
