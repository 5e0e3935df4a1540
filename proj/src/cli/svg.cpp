#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "whisker/cli.hpp"
#include "whisker/errors.hpp"

namespace whisker::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

// Tick step of 1, 2 or 5 times a power of ten giving about n ticks.
double nice_step(double span, int n) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / n;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * p) return m * p;
  return 10.0 * p;
}

std::string tick_label(double v, double step) {
  char buf[32];
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  std::snprintf(buf, sizeof buf, "%.*f", digits, std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

std::string line_plot_svg(const PlotSpec& spec, std::span<const Series> series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || (!s.band.empty() && s.band.size() != s.y.size()))
      throw ContractError("line_plot_svg: series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double b = s.band.empty() ? 0.0 : s.band[i];
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - b);
      y1 = std::max(y1, s.y[i] + b);
    }
  }
  for (double m : spec.markers) {
    x0 = std::min(x0, m);
    x1 = std::max(x1, m);
  }
  if (!(x1 >= x0)) x0 = 0.0, x1 = 1.0;
  if (!(y1 >= y0)) y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 60, right = spec.width - 130, top = 30, bottom = spec.height - 45;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
  auto py = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(spec.width / 2.0) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(spec.title) << "</text>\n";

  const double xs = nice_step(x1 - x0, 6), ys = nice_step(y1 - y0, 5);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(px(t))
       << "\" y2=\"" << num(bottom + 4) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(bottom + 16)
       << "\" text-anchor=\"middle\">" << tick_label(t, xs) << "</text>\n";
  }
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    os << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(right)
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"#e0e0e0\"/>";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\">" << tick_label(t, ys) << "</text>\n";
  }
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
     << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(spec.height - 8.0)
     << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(14," << num((top + bottom) / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    if (!s.band.empty() && !s.x.empty()) {
      os << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << num(px(s.x[i])) << ',' << num(py(s.y[i] + s.band[i])) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;)
        os << num(px(s.x[i])) << ',' << num(py(s.y[i] - s.band[i])) << ' ';
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    os << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(k) + 6;
    os << "<line x1=\"" << num(right + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(right + 28)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << num(right + 32) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
       << "</text>\n";
  }
  for (std::size_t k = 0; k < spec.markers.size(); ++k) {
    const double x = px(spec.markers[k]);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
       << num(bottom) << "\" stroke=\"black\" stroke-dasharray=\"4,3\"/>";
    os << "<text x=\"" << num(x + 3) << "\" y=\"" << num(top + 12) << "\">(" << k + 1
       << ")</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace whisker::cli
