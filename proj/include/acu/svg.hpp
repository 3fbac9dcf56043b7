// Copyright 2026 The Acurisk Authors. All Rights Reserved.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "acu/util.hpp"

namespace acu {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
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

}  // namespace detail

// Standalone SVG line chart; no external assets or scripts.
inline std::string render_line_chart(const std::string& title,
                                     const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<SvgSeries>& series) {
  const double width = 720.0, height = 480.0;
  const double ml = 70.0, mr = 170.0, mt = 50.0, mb = 60.0;
  const double pw = width - ml - mr, ph = height - mt - mb;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  const size_t n_colors = sizeof(palette) / sizeof(palette[0]);

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2.0
      << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"17\" font-weight=\"bold\">"
      << detail::svg_escape(title) << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    double f = static_cast<double>(i) / 5.0;
    double gx = ml + f * pw, gy = mt + f * ph;
    double xv = xmin + f * (xmax - xmin);
    double yv = ymax - f * (ymax - ymin);
    svg << "<line x1=\"" << gx << "\" y1=\"" << mt << "\" x2=\"" << gx
        << "\" y2=\"" << mt + ph << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << gy << "\" x2=\"" << ml + pw
        << "\" y2=\"" << gy << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << gx << "\" y=\"" << mt + ph + 20.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_fixed(xv, 2) << "</text>\n";
    svg << "<text x=\"" << ml - 8.0 << "\" y=\"" << gy + 4.0
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt_fixed(yv, 2) << "</text>\n";
  }
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#404040\"/>\n";
  svg << "<text x=\"" << ml + pw / 2.0 << "\" y=\"" << height - 14.0
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << detail::svg_escape(x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + ph / 2.0
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << mt + ph / 2.0 << ")\">" << detail::svg_escape(y_label)
      << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = palette[si % n_colors];
    std::ostringstream pts;
    for (const auto& [x, y] : series[si].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      pts << fmt_fixed(px(x), 2) << "," << fmt_fixed(py(y), 2) << " ";
    }
    svg << "<polyline points=\"" << pts.str()
        << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";
    double ly = mt + 16.0 + 18.0 * static_cast<double>(si);
    svg << "<line x1=\"" << ml + pw + 12.0 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw + 34.0 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2.2\"/>\n";
    svg << "<text x=\"" << ml + pw + 40.0 << "\" y=\"" << ly + 4.0
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::svg_escape(series[si].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace acu
