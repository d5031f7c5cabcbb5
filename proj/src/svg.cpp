#include "ic/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ic/errors.hpp"

namespace ic {
namespace {

constexpr int kW = 720, kH = 420;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 40;
const char* kPalette[] = {"#2266cc", "#dd8822", "#22aa55", "#cc3344", "#8855cc", "#777777"};

std::ofstream open_svg(const std::string& path, const std::string& title) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" "
        "text-anchor=\"middle\">" << title << "</text>\n";
  return os;
}

void value_range(const std::vector<PlotSeries>& series, double& lo, double& hi) {
  lo = 0.0;
  hi = 0.0;
  for (const auto& s : series) {
    for (double v : s.y) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (hi == lo) hi = lo + 1.0;
}

void draw_axes(std::ofstream& os, double lo, double hi, const std::string& y_label) {
  const int x0 = kMarginL, x1 = kW - kMarginR, y0 = kH - kMarginB, y1 = kMarginT;
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const double y = y0 - (y0 - y1) * i / 4.0;
    os << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">";
    std::ostringstream val;
    val.precision(3);
    val << v;
    os << val.str() << "</text>\n";
    os << "<line x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << x1 << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n";
  }
  os << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\" transform=\"rotate(-90 16 " << (y0 + y1) / 2 << ")\">" << y_label
     << "</text>\n";
}

void draw_legend(std::ofstream& os, const std::vector<PlotSeries>& series) {
  int x = kMarginL + 10;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 6];
    os << "<rect x=\"" << x << "\" y=\"" << kMarginT - 12 << "\" width=\"12\" height=\"12\" fill=\""
       << color << "\"/>\n";
    os << "<text x=\"" << x + 16 << "\" y=\"" << kMarginT - 2
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].name << "</text>\n";
    x += 16 + 9 * static_cast<int>(series[i].name.size()) + 18;
  }
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& y_label, const std::vector<PlotSeries>& series) {
  auto os = open_svg(path, title);
  double lo, hi;
  value_range(series, lo, hi);
  draw_axes(os, lo, hi, y_label);
  draw_legend(os, series);
  const int x0 = kMarginL, x1 = kW - kMarginR, y0 = kH - kMarginB, y1 = kMarginT;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.y.size() < 2) continue;
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.y.size(); ++k) {
      const double x = x0 + (x1 - x0) * static_cast<double>(k) / (s.y.size() - 1);
      const double v = std::isfinite(s.y[k]) ? s.y[k] : lo;
      const double y = y0 - (y0 - y1) * (v - lo) / (hi - lo);
      os << x << "," << y << " ";
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& groups,
                         const std::vector<PlotSeries>& series) {
  auto os = open_svg(path, title);
  double lo, hi;
  value_range(series, lo, hi);
  lo = std::min(lo, 0.0);
  draw_axes(os, lo, hi, "");
  draw_legend(os, series);
  const int x0 = kMarginL, x1 = kW - kMarginR, y0 = kH - kMarginB, y1 = kMarginT;
  const std::size_t ngroups = groups.size();
  const double group_w = static_cast<double>(x1 - x0) / std::max<std::size_t>(1, ngroups);
  const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, series.size());
  for (std::size_t g = 0; g < ngroups; ++g) {
    const double gx = x0 + group_w * g + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (g >= series[s].y.size()) continue;
      const double v = series[s].y[g];
      const double vb = std::isfinite(v) ? v : hi;
      const double yb = y0 - (y0 - y1) * (vb - lo) / (hi - lo);
      const double yz = y0 - (y0 - y1) * (0.0 - lo) / (hi - lo);
      os << "<rect x=\"" << gx + bar_w * s << "\" y=\"" << std::min(yb, yz) << "\" width=\""
         << bar_w * 0.9 << "\" height=\"" << std::fabs(yz - yb) << "\" fill=\"" << kPalette[s % 6]
         << "\"/>\n";
    }
    os << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << y0 + 16
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << groups[g]
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace ic
