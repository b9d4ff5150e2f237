#pragma once

// Standalone SVG charts: a multi-series line chart over the grid and a
// correlation heatmap of nominated pairs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "perftidy/correlate.hpp"
#include "perftidy/timealign.hpp"

namespace perftidy::plot {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

/// Diverging blue-white-red for r in [-1, 1].
inline std::string heat_color(double r) {
  r = std::clamp(r, -1.0, 1.0);
  int red = 255, green = 255, blue = 255;
  if (r >= 0) {
    green = blue = static_cast<int>(std::lround(255 * (1.0 - r)));
  } else {
    red = green = static_cast<int>(std::lround(255 * (1.0 + r)));
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, green, blue);
  return buf;
}

}  // namespace detail

/// Line chart of the selected columns; MISSING cells break the line.
inline std::string line_chart_svg(const TidyTable& table, const std::vector<std::size_t>& columns, const std::string& title) {
  const double width = 900, height = 420, left = 60, right = 220, top = 40, bottom = 40;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double lo = INFINITY, hi = -INFINITY;
  for (auto c : columns)
    for (const auto& v : table.column(c))
      if (v) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
  if (!(lo < hi)) {
    lo = std::isfinite(lo) ? lo - 1 : 0;
    hi = std::isfinite(hi) ? hi + 1 : 1;
  }
  const std::size_t n = table.n_rows();
  auto px = [&](std::size_t i) { return left + plot_w * static_cast<double>(i) / static_cast<double>(n - 1); };
  auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) + "\" height=\"" +
                    detail::num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::num(left) + "\" y=\"20\" font-size=\"14\">" + detail::escape(title) + "</text>\n";
  svg += "<rect x=\"" + detail::num(left) + "\" y=\"" + detail::num(top) + "\" width=\"" + detail::num(plot_w) +
         "\" height=\"" + detail::num(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"4\" y=\"" + detail::num(top + 10) + "\">" + detail::num(hi) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + detail::num(top + plot_h) + "\">" + detail::num(lo) + "</text>\n";
  svg += "<text x=\"" + detail::num(left) + "\" y=\"" + detail::num(height - 12) + "\">grid step 0 .. " +
         std::to_string(n - 1) + "</text>\n";
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& s = table.column(columns[k]);
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!s[i]) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L" : " M") + detail::num(px(i)) + "," + detail::num(py(*s[i]));
      pen_down = true;
    }
    svg += "<path fill=\"none\" stroke-width=\"1.2\" stroke=\"" + std::string(detail::palette(k)) + "\" d=\"" + path + "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(k + 1);
    svg += "<line x1=\"" + detail::num(width - right + 10) + "\" y1=\"" + detail::num(ly - 4) + "\" x2=\"" +
           detail::num(width - right + 30) + "\" y2=\"" + detail::num(ly - 4) + "\" stroke=\"" + detail::palette(k) + "\"/>\n";
    svg += "<text x=\"" + detail::num(width - right + 34) + "\" y=\"" + detail::num(ly) + "\">" +
           detail::escape(table.columns()[columns[k]].id()) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Symmetric matrix over the metrics named in `ranked`; cells show r at the best lag.
inline std::string heatmap_svg(const std::vector<CorrelationResult>& ranked, const std::string& title) {
  std::set<std::string> names;
  for (const auto& r : ranked) {
    names.insert(r.metric_a);
    names.insert(r.metric_b);
  }
  const std::vector<std::string> labels(names.begin(), names.end());
  std::map<std::pair<std::string, std::string>, const CorrelationResult*> cell;
  for (const auto& r : ranked) {
    cell[{r.metric_a, r.metric_b}] = &r;
    cell[{r.metric_b, r.metric_a}] = &r;
  }
  const double size = 28, left = 230, top = 60;
  const double dim = size * static_cast<double>(labels.size());
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(left + dim + 40) + "\" height=\"" +
                    detail::num(top + dim + 230) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"10\" y=\"20\" font-size=\"14\">" + detail::escape(title) + "</text>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = top + size * static_cast<double>(i);
    svg += "<text x=\"" + detail::num(left - 6) + "\" y=\"" + detail::num(y + size * 0.65) + "\" text-anchor=\"end\">" +
           detail::escape(labels[i]) + "</text>\n";
    const double x = left + size * static_cast<double>(i);
    svg += "<text transform=\"translate(" + detail::num(x + size * 0.6) + "," + detail::num(top + dim + 6) +
           ") rotate(60)\">" + detail::escape(labels[i]) + "</text>\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const double cx = left + size * static_cast<double>(j);
      std::string fill = "#eeeeee", label;
      if (i == j) {
        fill = detail::heat_color(1.0);
      } else if (auto it = cell.find({labels[i], labels[j]}); it != cell.end()) {
        fill = detail::heat_color(it->second->r_at_best);
        label = std::to_string(labels[i] == it->second->metric_a ? it->second->best_lag : -it->second->best_lag);
      }
      svg += "<rect x=\"" + detail::num(cx) + "\" y=\"" + detail::num(y) + "\" width=\"" + detail::num(size) +
             "\" height=\"" + detail::num(size) + "\" fill=\"" + fill + "\" stroke=\"white\"/>\n";
      if (!label.empty())
        svg += "<text x=\"" + detail::num(cx + size / 2) + "\" y=\"" + detail::num(y + size * 0.65) +
               "\" text-anchor=\"middle\">" + label + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace perftidy::plot
