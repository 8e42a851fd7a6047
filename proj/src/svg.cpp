// Copyright 2026 The Semixup Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "semixup/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace semixup::svg {
namespace {

std::string num(double v, int digits = 2) {
  if (v == 0.0) v = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void open_svg(std::ostringstream& out, int w, int h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

void text(std::ostringstream& out, double x, double y, const std::string& s, const char* anchor = "middle",
          const std::string& extra = "") {
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << "\"" << extra << ">"
      << escape(s) << "</text>\n";
}

// White to dark blue.
std::string shade(double frac) {
  frac = std::clamp(frac, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 - frac * (255 - 8)));
  const int g = static_cast<int>(std::lround(255 - frac * (255 - 48)));
  const int b = static_cast<int>(std::lround(255 - frac * (255 - 107)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string escape(const std::string& s) {
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

std::string stars(std::optional<double> p) {
  if (!p) return "";
  if (*p < 0.001) return "***";
  if (*p < 0.01) return "**";
  if (*p < 0.05) return "*";
  return "";
}

std::string confusion_heatmap(const std::vector<std::vector<long>>& counts, const std::string& title) {
  const auto pct = evaluate::row_percentages(counts);
  const int k = static_cast<int>(counts.size());
  const int cell = 56, left = 70, top = 50;
  const int w = left + k * cell + 20, h = top + k * cell + 50;
  std::ostringstream out;
  open_svg(out, w, h);
  text(out, w / 2.0, 22, title, "middle", " font-size=\"14\"");
  for (int t = 0; t < k; ++t) {
    for (int p = 0; p < k; ++p) {
      const double x = left + p * cell, y = top + t * cell;
      const double v = pct[t][p];
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << shade(v / 100.0) << "\" stroke=\"#999\"/>\n";
      const std::string colour = v > 55.0 ? " fill=\"white\"" : "";
      text(out, x + cell / 2.0, y + cell / 2.0 - 2, num(v, 1) + "%", "middle", colour);
      text(out, x + cell / 2.0, y + cell / 2.0 + 13, "(" + std::to_string(counts[t][p]) + ")", "middle",
           colour + " font-size=\"10\"");
    }
    text(out, left - 8, top + t * cell + cell / 2.0 + 4, std::to_string(t), "end");
    text(out, left + t * cell + cell / 2.0, top + k * cell + 16, std::to_string(t));
  }
  text(out, left + k * cell / 2.0, top + k * cell + 36, "Predicted grade");
  out << "<text x=\"16\" y=\"" << num(top + k * cell / 2.0) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(top + k * cell / 2.0) << ")\">True grade</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string curve_plot(const std::vector<evaluate::CurvePoint>& curve, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool diagonal,
                       std::optional<double> area) {
  const int w = 360, h = 360, left = 60, top = 40, side = 260;
  auto px = [&](double x) { return left + x * side; };
  auto py = [&](double y) { return top + (1.0 - y) * side; };
  std::ostringstream out;
  open_svg(out, w, h);
  text(out, w / 2.0, 22, title, "middle", " font-size=\"14\"");
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << side << "\" height=\"" << side
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    text(out, px(v), top + side + 16, num(v));
    text(out, left - 6, py(v) + 4, num(v), "end");
  }
  if (diagonal)
    out << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(1)) << "\" y2=\""
        << num(py(1)) << "\" stroke=\"#aaa\" stroke-dasharray=\"4 4\"/>\n";
  if (!curve.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#08306b\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.size(); ++i)
      out << (i ? " " : "") << num(px(curve[i].x)) << ',' << num(py(curve[i].y));
    out << "\"/>\n";
  }
  if (area) text(out, px(0.95), py(0.05), "area " + num(*area, 3), "end");
  text(out, left + side / 2.0, top + side + 36, x_label);
  out << "<text x=\"16\" y=\"" << num(top + side / 2.0) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(top + side / 2.0) << ")\">" << escape(y_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string bar_chart(const std::vector<Bar>& bars, const std::string& title, const std::string& y_label) {
  const int slot = 80, left = 60, top = 40, plot_h = 240;
  const int n = static_cast<int>(bars.size());
  const int w = left + std::max(n, 1) * slot + 20, h = top + plot_h + 60;
  double hi = 0.0;
  for (const auto& b : bars) hi = std::max(hi, b.mean + b.se);
  hi = hi > 0.0 ? std::ceil(hi * 10.0) / 10.0 : 1.0;
  auto py = [&](double v) { return top + plot_h * (1.0 - v / hi); };
  std::ostringstream out;
  open_svg(out, w, h);
  text(out, w / 2.0, 22, title, "middle", " font-size=\"14\"");
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << w - 20 << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = hi * i / 4.0;
    text(out, left - 6, py(v) + 4, num(v), "end");
  }
  for (int i = 0; i < n; ++i) {
    const auto& b = bars[i];
    const double cx = left + slot * (i + 0.5);
    out << "<rect x=\"" << num(cx - slot * 0.3) << "\" y=\"" << num(py(b.mean)) << "\" width=\"" << num(slot * 0.6)
        << "\" height=\"" << num(top + plot_h - py(b.mean)) << "\" fill=\"#6baed6\"/>\n";
    const double y0 = py(std::max(0.0, b.mean - b.se)), y1 = py(b.mean + b.se);
    out << "<path d=\"M" << num(cx) << ' ' << num(y0) << " V" << num(y1) << " M" << num(cx - 8) << ' ' << num(y1)
        << " H" << num(cx + 8) << " M" << num(cx - 8) << ' ' << num(y0) << " H" << num(cx + 8)
        << "\" stroke=\"black\" fill=\"none\"/>\n";
    if (!b.marker.empty()) text(out, cx, y1 - 6, b.marker, "middle", " font-size=\"16\"");
    text(out, cx, top + plot_h + 16, b.label);
  }
  text(out, w / 2.0, h - 12, "bars: mean; whiskers: +/- 1 standard error", "middle", " font-size=\"10\"");
  out << "<text x=\"16\" y=\"" << num(top + plot_h / 2.0) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(top + plot_h / 2.0) << ")\">" << escape(y_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace semixup::svg
