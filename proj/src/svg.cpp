#include "nrfar/svg.hpp"

#include <cmath>
#include <sstream>

namespace nrfar {

namespace {

std::string num(double v) {
  std::ostringstream out;
  out.precision(2);
  out << std::fixed << v;
  return out.str();
}

}  // namespace

std::string svg_line_chart(const std::string& title,
                           const std::vector<std::string>& x_labels,
                           const std::string& x_title, const std::string& y_title,
                           const std::vector<SvgSeries>& series, int width, int height) {
  const double ml = 60, mr = 20, mt = 40, mb = 55;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  const std::size_t nx = x_labels.size();

  auto xpos = [&](std::size_t i) {
    if (nx <= 1) return ml + pw / 2;
    return ml + pw * static_cast<double>(i) / static_cast<double>(nx - 1);
  };
  auto ypos = [&](double v) { return mt + ph * (1.0 - v); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
    << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // Gridlines and y ticks every 0.1.
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    const double y = ypos(v);
    s << "<line x1=\"" << num(ml) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ml + pw)
      << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
      << "</text>\n";
  }
  // Axes.
  s << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
    << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(ml + pw)
    << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";

  for (std::size_t i = 0; i < nx; ++i) {
    s << "<text x=\"" << num(xpos(i)) << "\" y=\"" << num(mt + ph + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << x_labels[i] << "</text>\n";
  }
  s << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(mt + ph + 40)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_title
    << "</text>\n";
  s << "<text x=\"16\" y=\"" << num(mt + ph / 2)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 " << num(mt + ph / 2) << ")\">" << y_title << "</text>\n";

  double legend_y = mt + 10;
  for (const SvgSeries& ser : series) {
    // Error bars.
    for (std::size_t i = 0; i < ser.y.size() && i < nx; ++i) {
      if (std::isnan(ser.y[i])) continue;
      const double e = i < ser.yerr.size() ? ser.yerr[i] : 0.0;
      if (e > 0.0) {
        const double x = xpos(i);
        s << "<line x1=\"" << num(x) << "\" y1=\"" << num(ypos(ser.y[i] - e)) << "\" x2=\""
          << num(x) << "\" y2=\"" << num(ypos(ser.y[i] + e)) << "\" stroke=\"" << ser.color
          << "\" stroke-width=\"1\" opacity=\"0.6\"/>\n";
      }
    }
    // Polyline through defined points.
    s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < ser.y.size() && i < nx; ++i) {
      if (std::isnan(ser.y[i])) continue;
      s << num(xpos(i)) << ',' << num(ypos(ser.y[i])) << ' ';
    }
    s << "\"/>\n";
    for (std::size_t i = 0; i < ser.y.size() && i < nx; ++i) {
      if (std::isnan(ser.y[i])) continue;
      s << "<circle cx=\"" << num(xpos(i)) << "\" cy=\"" << num(ypos(ser.y[i]))
        << "\" r=\"3\" fill=\"" << ser.color << "\"/>\n";
    }
    s << "<rect x=\"" << num(ml + pw - 150) << "\" y=\"" << num(legend_y - 9)
      << "\" width=\"12\" height=\"12\" fill=\"" << ser.color << "\"/>\n";
    s << "<text x=\"" << num(ml + pw - 133) << "\" y=\"" << num(legend_y + 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << ser.label << "</text>\n";
    legend_y += 18;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace nrfar
