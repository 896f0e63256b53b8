#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace spiked::cli {
namespace {

constexpr double kWidth = 640, kHeight = 480, kMargin = 60;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  std::string s;
  s += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kWidth - 2 * kMargin) +
       "\" height=\"" + num(kHeight - 2 * kMargin) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"30\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
       escape(xl) + "</text>\n";
  s += "<text x=\"15\" y=\"" + num(kHeight / 2) + "\" transform=\"rotate(-90 15 " + num(kHeight / 2) +
       ")\" text-anchor=\"middle\">" + escape(yl) + "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kHeight - kMargin + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + num(xv) + "</text>\n";
    s += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + num(yv) + "</text>\n";
  }
  return s;
}

std::string open_svg() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\">\n";
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1;
  if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1;
  std::string out = open_svg() + axes(f, title, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % 6];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i)
      out += (i ? " " : "") + num(f.px(series[k].x[i])) + "," + num(f.py(series[k].y[i]));
    out += "\"/>\n";
    out += "<text x=\"" + num(kWidth - kMargin - 5) + "\" y=\"" + num(kMargin + 16 + 16 * k) +
           "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" + escape(series[k].label) +
           "</text>\n";
  }
  return out + "</svg>\n";
}

std::string histogram_plot(const std::string& title, const std::vector<Histogram>& panels) {
  Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(), 0.0, 0.0};
  for (const auto& p : panels) {
    f.x0 = std::min(f.x0, p.edges.front());
    f.x1 = std::max(f.x1, p.edges.back());
    for (double c : p.counts) f.y1 = std::max(f.y1, c);
  }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1;
  if (!(f.y1 > 0)) f.y1 = 1;
  std::string out = open_svg() + axes(f, title, "eigenvalue", "count");
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const char* color = kPalette[k % 6];
    const auto& p = panels[k];
    for (std::size_t i = 0; i < p.counts.size(); ++i) {
      if (p.counts[i] <= 0) continue;
      const double x = f.px(p.edges[i]);
      const double w = f.px(p.edges[i + 1]) - x;
      const double y = f.py(p.counts[i]);
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(std::max(w, 0.5)) +
             "\" height=\"" + num(f.py(0) - y) + "\" fill=\"" + color + "\" fill-opacity=\"0.5\"/>\n";
    }
    out += "<text x=\"" + num(kWidth - kMargin - 5) + "\" y=\"" + num(kMargin + 16 + 16 * k) +
           "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" + escape(p.label) + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace spiked::cli
