// Copyright 2026 The segqual Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segqual/plot.hpp"

#include <algorithm>
#include <cstdio>

namespace segqual::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

struct Frame {
  Axes axes;
  double sx(double x) const {
    const double span = axes.x_max - axes.x_min;
    return kLeft + (span > 0 ? (x - axes.x_min) / span : 0.0) * (kWidth - kLeft - kRight);
  }
  double sy(double y) const {
    const double span = axes.y_max - axes.y_min;
    return kHeight - kBottom - (span > 0 ? (y - axes.y_min) / span : 0.0) * (kHeight - kTop - kBottom);
  }
};

std::string open_frame(const Frame& f, const std::string& defs = {}) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, 0) + "\" height=\"" +
                  num(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!defs.empty()) s += "<defs>" + defs + "</defs>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2, 1) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(f.axes.title) + "</text>\n";
  const double x0 = f.sx(f.axes.x_min), x1 = f.sx(f.axes.x_max);
  const double y0 = f.sy(f.axes.y_min), y1 = f.sy(f.axes.y_max);
  s += "<rect x=\"" + num(x0, 1) + "\" y=\"" + num(y1, 1) + "\" width=\"" + num(x1 - x0, 1) + "\" height=\"" +
       num(y0 - y1, 1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = i / 5.0;
    const double xv = f.axes.x_min + t * (f.axes.x_max - f.axes.x_min);
    const double yv = f.axes.y_min + t * (f.axes.y_max - f.axes.y_min);
    s += "<line x1=\"" + num(f.sx(xv), 1) + "\" y1=\"" + num(y0, 1) + "\" x2=\"" + num(f.sx(xv), 1) + "\" y2=\"" +
         num(y0 + 5, 1) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(f.sx(xv), 1) + "\" y=\"" + num(y0 + 18, 1) + "\" text-anchor=\"middle\">" + num(xv) +
         "</text>\n";
    s += "<line x1=\"" + num(x0 - 5, 1) + "\" y1=\"" + num(f.sy(yv), 1) + "\" x2=\"" + num(x0, 1) + "\" y2=\"" +
         num(f.sy(yv), 1) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x0 - 8, 1) + "\" y=\"" + num(f.sy(yv) + 4, 1) + "\" text-anchor=\"end\">" + num(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2, 1) + "\" y=\"" + num(kHeight - 15, 1) + "\" text-anchor=\"middle\">" +
       escape(f.axes.x_label) + "</text>\n";
  s += "<text transform=\"translate(18," + num((y0 + y1) / 2, 1) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(f.axes.y_label) + "</text>\n";
  return s;
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  const Frame f{axes};
  std::string s = open_frame(f);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    std::string pts;
    for (const auto& [x, y] : series[i].points) pts += num(f.sx(x), 2) + "," + num(f.sy(y), 2) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
         "\"/>\n";
    const double ly = kTop + 12 + 16.0 * static_cast<double>(i);
    const double lx = kWidth - kRight - 150;
    s += "<line x1=\"" + num(lx, 1) + "\" y1=\"" + num(ly - 4, 1) + "\" x2=\"" + num(lx + 20, 1) + "\" y2=\"" +
         num(ly - 4, 1) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(lx + 26, 1) + "\" y=\"" + num(ly, 1) + "\">" + escape(series[i].label) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string histogram(const Axes& axes, const std::vector<double>& edges, const std::vector<double>& counts) {
  const Frame f{axes};
  const std::string hatch =
      "<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" "
      "patternTransform=\"rotate(45)\"><rect width=\"6\" height=\"6\" fill=\"#f4c7c7\"/>"
      "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#d62728\" stroke-width=\"2\"/></pattern>";
  std::string s = open_frame(f, hatch);
  const std::size_t bars = std::min(counts.size(), edges.empty() ? 0 : edges.size() - 1);
  for (std::size_t b = 0; b < bars; ++b) {
    if (counts[b] <= 0) continue;
    const double x0 = f.sx(edges[b]);
    const double x1 = f.sx(edges[b + 1]);
    const double top = f.sy(std::min(counts[b], axes.y_max));
    const bool negative = edges[b + 1] <= 0.0;
    s += "<rect x=\"" + num(x0, 2) + "\" y=\"" + num(top, 2) + "\" width=\"" + num(x1 - x0, 2) + "\" height=\"" +
         num(f.sy(axes.y_min) - top, 2) + "\" fill=\"" + (negative ? "url(#hatch)" : "#1f77b4") +
         "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }
  return s + "</svg>\n";
}

}  // namespace segqual::plot
