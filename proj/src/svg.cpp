#include "flexact/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace flexact::svg {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void write_chart(const std::string& path, const ChartSpec& spec,
                 const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin <= xmax)) throw std::invalid_argument("write_chart: no points");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double left = 60, right = 20, top = 36, bottom = 46;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_chart: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << " " << spec.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << spec.title << "</text>\n";

  // axes
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\""
      << fmt(left) << "\" y2=\"" << fmt(top + ph)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\""
      << fmt(left + pw) << "\" y2=\"" << fmt(top + ph)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / kTicks;
    const double fy = ymin + (ymax - ymin) * t / kTicks;
    out << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(top + ph)
        << "\" x2=\"" << fmt(px(fx)) << "\" y2=\"" << fmt(top + ph + 4)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(top + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << fmt_tick(fx) << "</text>\n"
        << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py(fy))
        << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(py(fy))
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py(fy) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << fmt_tick(fy) << "</text>\n";
  }

  out << "<text x=\"" << spec.width / 2 << "\" y=\"" << spec.height - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << spec.x_label << "</text>\n"
      << "<text x=\"14\" y=\"" << fmt(top + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 14 "
      << fmt(top + ph / 2) << ")\">" << spec.y_label << "</text>\n";

  for (const Series& s : series) {
    if (s.scatter) {
      for (const auto& [x, y] : s.points) {
        out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
            << "\" r=\"2\" fill=\"" << s.color << "\" fill-opacity=\"0.6\"/>\n";
      }
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) {
        out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
      }
      out << "\"/>\n";
    }
  }

  // legend, top-right of the plot area
  double ly = top + 10;
  for (const Series& s : series) {
    const double lx = left + pw - 120;
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 8)
        << "\" width=\"12\" height=\"8\" fill=\"" << s.color << "\"/>\n"
        << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
        << "</text>\n";
    ly += 14;
  }
  out << "</svg>\n";
}

}  // namespace flexact::svg
