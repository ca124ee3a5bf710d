#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cleftsim/errors.hpp"

// Minimal static SVG line plots, enough for one bound-receptors-vs-time
// figure per scenario. No dependencies, fixed canvas.

namespace cleft {

struct PlotCurve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;  // used for saturation-off variants
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::vector<PlotCurve>& curves) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 860, height = 540;
  const double ml = 70, mr = 210, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_min = 1e300, x_max = -1e300, y_min = 0.0, y_max = -1e300;
  for (const auto& c : curves) {
    for (double v : c.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : c.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  y_max *= 1.05;

  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  os << "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 " << width << " " << height
     << "' font-family='sans-serif' font-size='13'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << ml << "' y='24' font-size='16'>" << title << "</text>\n";

  // axes and ticks
  os << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='" << mt + ph
     << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + ph
     << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", xv);
    os << "<line x1='" << px(xv) << "' y1='" << mt + ph << "' x2='" << px(xv) << "' y2='"
       << mt + ph + 5 << "' stroke='black'/><text x='" << px(xv) << "' y='" << mt + ph + 20
       << "' text-anchor='middle'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%g", yv);
    os << "<line x1='" << ml - 5 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
       << "' stroke='black'/><text x='" << ml - 9 << "' y='" << py(yv) + 4
       << "' text-anchor='end'>" << buf << "</text>\n";
  }
  os << "<text x='" << ml + pw / 2 << "' y='" << height - 12 << "' text-anchor='middle'>"
     << x_label << "</text>\n";
  os << "<text x='18' y='" << mt + ph / 2 << "' text-anchor='middle' transform='rotate(-90 18 "
     << mt + ph / 2 << ")'>" << y_label << "</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const PlotCurve& c = curves[ci];
    const char* color = palette[ci % (sizeof(palette) / sizeof(palette[0]))];
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6'";
    if (c.dashed) os << " stroke-dasharray='6,4'";
    os << " points='";
    const std::size_t n = std::min(c.x.size(), c.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);  // keep files small
    for (std::size_t i = 0; i < n; i += stride) {
      os << px(c.x[i]) << "," << py(c.y[i]) << " ";
    }
    if (n > 0) os << px(c.x[n - 1]) << "," << py(c.y[n - 1]);
    os << "'/>\n";
    const double ly = mt + 16.0 * (ci + 1);
    os << "<line x1='" << ml + pw + 10 << "' y1='" << ly - 4 << "' x2='" << ml + pw + 34
       << "' y2='" << ly - 4 << "' stroke='" << color << "' stroke-width='1.6'";
    if (c.dashed) os << " stroke-dasharray='6,4'";
    os << "/><text x='" << ml + pw + 40 << "' y='" << ly << "'>" << c.label << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace cleft
