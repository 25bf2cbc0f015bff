#include "ncskit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ncskit::plot {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 44.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string trace_to_svg(const sim::SimTrace& trace, const std::vector<int>& columns) {
  if (trace.steps.empty()) throw std::runtime_error("plot: empty trace");
  const int n = static_cast<int>(trace.steps.front().x.size());

  std::vector<int> cols = columns;
  if (cols.empty())
    for (int i = 0; i < n; ++i) cols.push_back(i);
  for (int c : cols)
    if (c < 0 || c >= n) throw std::runtime_error("plot: state column out of range");

  double tmin = trace.steps.front().time, tmax = trace.steps.back().time;
  if (tmax <= tmin) tmax = tmin + 1.0;
  double ymin = 0.0, ymax = 0.0;
  for (const auto& s : trace.steps)
    for (int c : cols) {
      ymin = std::min(ymin, s.x[c]);
      ymax = std::max(ymax, s.x[c]);
    }
  if (ymax - ymin < 1e-12) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kMarginLeft - kMarginRight;
  const double ph = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double t) { return kMarginLeft + pw * (t - tmin) / (tmax - tmin); };
  auto sy = [&](double y) { return kMarginTop + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

  // axes
  svg << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\""
      << fmt(kMarginLeft) << "\" y2=\"" << fmt(kMarginTop + ph)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(kMarginTop + ph) << "\" x2=\""
      << fmt(kMarginLeft + pw) << "\" y2=\"" << fmt(kMarginTop + ph)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  if (ymin < 0.0 && ymax > 0.0)
    svg << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(sy(0.0)) << "\" x2=\""
        << fmt(kMarginLeft + pw) << "\" y2=\"" << fmt(sy(0.0))
        << "\" stroke=\"#cccccc\" stroke-width=\"1\" stroke-dasharray=\"4 4\"/>\n";

  // drop-event markers (ineffective steps) as light ticks along the bottom
  for (const auto& s : trace.steps)
    if (!s.effective)
      svg << "<line x1=\"" << fmt(sx(s.time)) << "\" y1=\"" << fmt(kMarginTop + ph) << "\" x2=\""
          << fmt(sx(s.time)) << "\" y2=\"" << fmt(kMarginTop + ph - 6.0)
          << "\" stroke=\"#f2a0a0\" stroke-width=\"1\"/>\n";

  // mode-change markers as vertical dashed lines
  for (size_t i = 1; i < trace.steps.size(); ++i)
    if (trace.steps[i].mode != trace.steps[i - 1].mode)
      svg << "<line x1=\"" << fmt(sx(trace.steps[i].time)) << "\" y1=\"" << fmt(kMarginTop)
          << "\" x2=\"" << fmt(sx(trace.steps[i].time)) << "\" y2=\"" << fmt(kMarginTop + ph)
          << "\" stroke=\"#dddddd\" stroke-width=\"1\" stroke-dasharray=\"2 3\"/>\n";

  for (size_t ci = 0; ci < cols.size(); ++ci) {
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[ci % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& s : trace.steps)
      svg << fmt(sx(s.time)) << "," << fmt(sy(s.x[cols[ci]])) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << fmt(kMarginLeft + pw - 60.0) << "\" y=\""
        << fmt(kMarginTop + 16.0 + 16.0 * static_cast<double>(ci)) << "\" fill=\""
        << kPalette[ci % 8] << "\" font-size=\"13\" font-family=\"sans-serif\">x"
        << (cols[ci] + 1) << "</text>\n";
  }

  svg << "<text x=\"" << fmt(kMarginLeft + pw / 2.0) << "\" y=\"" << fmt(kHeight - 10.0)
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">time [s]</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ncskit::plot
