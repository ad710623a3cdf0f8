#include "dki/report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace dki::report {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double w, double h, std::string_view title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      w, h, w / 2, escape(title));
}

struct Range {
  double lo, hi;
  double map(double v, double a, double b) const { return hi == lo ? (a + b) / 2 : a + (v - lo) / (hi - lo) * (b - a); }
};

Range value_range(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (lo >= 0.0 && hi <= 1.0) return {0.0, 1.0};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

std::string axes(std::string_view x_label, std::string_view y_label, Range y) {
  std::string out;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x1, y0);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x0, y1);
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    const double py = y.map(v, y0, y1);
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", x0, py, x1, py);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 6, py + 4, v);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (x0 + x1) / 2, kHeight - 18,
                     escape(x_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     (y0 + y1) / 2, escape(y_label));
  return out;
}

}  // namespace

std::string svg_line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                          std::span<const Series> series, bool log2_x) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  auto xt = [&](double x) { return log2_x ? std::log2(x) : x; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      xlo = std::min(xlo, xt(s.x[i]));
      xhi = std::max(xhi, xt(s.x[i]));
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  const Range xr = std::isfinite(xlo) ? Range{xlo, xhi} : Range{0.0, 1.0};
  const Range yr = value_range(ylo, yhi);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  std::string out = header(kWidth, kHeight, title);
  out += axes(x_label, y_label, yr);

  // x ticks at the distinct data x values
  std::vector<double> ticks;
  for (const auto& s : series) ticks.insert(ticks.end(), s.x.begin(), s.x.end());
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double t : ticks)
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", xr.map(xt(t), x0, x1),
                       y0 + 16, t);

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const auto n = std::min(s.x.size(), s.y.size());
    std::string points;
    for (std::size_t i = 0; i < n; ++i)
      points += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", xr.map(xt(s.x[i]), x0, x1), yr.map(s.y[i], y0, y1));
    out += fmt::format("<g data-series=\"{}\">\n", escape(s.name));
    if (n > 1) out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", points, color);
    for (std::size_t i = 0; i < n; ++i)
      out += fmt::format(
          "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" data-series=\"{}\" data-x=\"{:.17g}\" "
          "data-y=\"{:.17g}\"/>\n",
          xr.map(xt(s.x[i]), x0, x1), yr.map(s.y[i], y0, y1), color, escape(s.name), s.x[i], s.y[i]);
    out += "</g>\n";
    const double ly = kTop + 18.0 * static_cast<double>(k) + 10;
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n", x1 + 14, ly - 4, color);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", x1 + 32, ly, escape(s.name));
  }
  out += "</svg>\n";
  return out;
}

std::string svg_bar_chart(std::string_view title, std::string_view x_label, std::span<const std::string> labels,
                          std::span<const double> values) {
  const auto n = std::min(labels.size(), values.size());
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) hi = std::max(hi, values[i]);
  const Range yr{0.0, hi > 0.0 ? hi : 1.0};
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  std::string out = header(kWidth, kHeight, title);
  out += axes(x_label, "count", yr);
  const double slot = n ? (x1 - x0) / static_cast<double>(n) : 0.0;
  // Label every bar when few, otherwise about 16 evenly spaced labels.
  const std::size_t every = std::max<std::size_t>(1, n / 16);
  for (std::size_t i = 0; i < n; ++i) {
    const double px = x0 + slot * static_cast<double>(i);
    const double py = yr.map(values[i], y0, y1);
    out += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" data-label=\"{}\" "
        "data-value=\"{:.17g}\"/>\n",
        px + slot * 0.1, py, slot * 0.8, y0 - py, kPalette[0], escape(labels[i]), values[i]);
    if (i % every == 0 || i + 1 == n)
      out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
                         px + slot / 2, y0 + 14, escape(labels[i]));
  }
  out += "</svg>\n";
  return out;
}

std::string svg_heatmap(std::string_view title, std::string_view row_label, std::string_view col_label,
                        const signals::Matrix& matrix) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : matrix.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kTop + 10, y1 = kHeight - kBottom;
  const double cw = matrix.cols ? (x1 - x0) / static_cast<double>(matrix.cols) : 0.0;
  const double ch = matrix.rows ? (y1 - y0) / static_cast<double>(matrix.rows) : 0.0;

  std::string out = header(kWidth, kHeight, title);
  for (std::size_t r = 0; r < matrix.rows; ++r)
    for (std::size_t c = 0; c < matrix.cols; ++c) {
      const double v = matrix(r, c);
      const double u = hi > lo ? (v - lo) / (hi - lo) : 0.5;
      // white -> dark blue
      const int red = static_cast<int>(std::lround(255 - 239 * u));
      const int green = static_cast<int>(std::lround(255 - 185 * u));
      const int blue = static_cast<int>(std::lround(255 - 127 * u));
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#{:02x}{:02x}{:02x}\" "
          "data-row=\"{}\" data-col=\"{}\" data-value=\"{:.17g}\"/>\n",
          x0 + cw * static_cast<double>(c), y0 + ch * static_cast<double>(r), cw, ch, red, green, blue, r, c, v);
    }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (x0 + x1) / 2, kHeight - 24,
                     escape(col_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                     (y0 + y1) / 2, escape(row_label));
  if (std::isfinite(lo))
    out += fmt::format("<text x=\"{}\" y=\"{}\">min {:.4g}</text>\n<text x=\"{}\" y=\"{}\">max {:.4g}</text>\n", x1 + 14,
                       y0 + 12, lo, x1 + 14, y0 + 30, hi);
  out += "</svg>\n";
  return out;
}

}  // namespace dki::report
