// Copyright 2026 The aqs Authors.
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

#include "pipeline/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace aqs::pipeline {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// compact viridis-style ramp
std::string accuracy_color(double t) {
  struct Anchor {
    double t;
    int r, g, b;
  };
  static const Anchor ramp[] = {{0.00, 68, 1, 84},
                                {0.25, 59, 82, 139},
                                {0.50, 33, 145, 140},
                                {0.75, 94, 201, 98},
                                {1.00, 253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0);
  for (int i = 0; i < 4; ++i) {
    if (t <= ramp[i + 1].t) {
      const double u = (t - ramp[i].t) / (ramp[i + 1].t - ramp[i].t);
      char buf[16];
      std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                    static_cast<int>(std::lround(ramp[i].r + u * (ramp[i + 1].r - ramp[i].r))),
                    static_cast<int>(std::lround(ramp[i].g + u * (ramp[i + 1].g - ramp[i].g))),
                    static_cast<int>(std::lround(ramp[i].b + u * (ramp[i + 1].b - ramp[i].b))));
      return buf;
    }
  }
  return "#fde725";
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string scatter_svg(const std::vector<AtlasFileRow>& atlas,
                        const bench::BenchmarkTable* table,
                        const std::string& title) {
  const int w = 640, h = 640, margin = 48;
  double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
  if (!atlas.empty()) {
    lo_x = hi_x = atlas[0].x;
    lo_y = hi_y = atlas[0].y;
    for (const auto& r : atlas) {
      lo_x = std::fmin(lo_x, r.x);
      hi_x = std::fmax(hi_x, r.x);
      lo_y = std::fmin(lo_y, r.y);
      hi_y = std::fmax(hi_y, r.y);
    }
  }
  if (hi_x == lo_x) hi_x = lo_x + 1;
  if (hi_y == lo_y) hi_y = lo_y + 1;

  double acc_lo = 1e300, acc_hi = -1e300;
  if (table) {
    for (const auto& r : atlas) {
      const bench::BenchRow* row = table->find(r.canonical);
      if (row) {
        acc_lo = std::fmin(acc_lo, row->accuracy);
        acc_hi = std::fmax(acc_hi, row->accuracy);
      }
    }
  }
  if (acc_lo > acc_hi) {
    acc_lo = 0;
    acc_hi = 1;
  }
  if (acc_hi == acc_lo) acc_hi = acc_lo + 1e-9;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
  svg += "<rect x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(margin) +
         "\" width=\"" + std::to_string(w - 2 * margin) + "\" height=\"" +
         std::to_string(h - 2 * margin) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";

  for (const auto& r : atlas) {
    const double px = margin + (r.x - lo_x) / (hi_x - lo_x) * (w - 2 * margin);
    const double py = h - margin - (r.y - lo_y) / (hi_y - lo_y) * (h - 2 * margin);
    std::string color = "#bbbbbb";
    if (table) {
      const bench::BenchRow* row = table->find(r.canonical);
      if (row) color = accuracy_color((row->accuracy - acc_lo) / (acc_hi - acc_lo));
    }
    svg += "<circle cx=\"" + fmt(px) + "\" cy=\"" + fmt(py) +
           "\" r=\"3\" fill=\"" + color + "\" fill-opacity=\"0.85\"/>\n";
  }
  svg += "<text x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(h - 12) +
         "\" font-family=\"sans-serif\" font-size=\"11\">accuracy " + fmt(acc_lo) +
         " (dark) to " + fmt(acc_hi) + " (bright), " +
         std::to_string(atlas.size()) + " functions</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string curves_svg(const std::vector<bench::AggregateCurve>& curves,
                       const std::string& title) {
  const int w = 800, h = 500, margin = 56;
  std::size_t steps = 0;
  double lo = 1e300, hi = -1e300;
  for (const auto& c : curves) {
    steps = std::max(steps, c.mean.size());
    for (std::size_t s = 0; s < c.mean.size(); ++s) {
      lo = std::fmin(lo, c.ci_lo[s]);
      hi = std::fmax(hi, c.ci_hi[s]);
    }
  }
  if (steps == 0) {
    steps = 1;
    lo = 0;
    hi = 1;
  }
  const double pad = 0.02 * (hi - lo + 1e-9);
  lo -= pad;
  hi += pad;

  auto px = [&](double step) {
    return margin + (step - 1) / std::max<double>(1.0, steps - 1) * (w - 2 * margin);
  };
  auto py = [&](double acc) {
    return h - margin - (acc - lo) / (hi - lo) * (h - 2 * margin);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
  svg += "<rect x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(margin) +
         "\" width=\"" + std::to_string(w - 2 * margin) + "\" height=\"" +
         std::to_string(h - 2 * margin) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"" + std::to_string(h - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
         "functions evaluated</text>\n";

  int color = 0;
  for (const auto& c : curves) {
    const char* stroke = kPalette[color % 8];
    // confidence band
    std::string band = "<polygon fill=\"" + std::string(stroke) +
                       "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (std::size_t s = 0; s < c.mean.size(); ++s)
      band += fmt(px(double(s + 1))) + "," + fmt(py(c.ci_hi[s])) + " ";
    for (std::size_t s = c.mean.size(); s-- > 0;)
      band += fmt(px(double(s + 1))) + "," + fmt(py(c.ci_lo[s])) + " ";
    band += "\"/>\n";
    svg += band;
    // mean line
    std::string line = "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
                       "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t s = 0; s < c.mean.size(); ++s)
      line += fmt(px(double(s + 1))) + "," + fmt(py(c.mean[s])) + " ";
    line += "\"/>\n";
    svg += line;
    // legend entry
    const int ly = margin + 18 * color + 12;
    svg += "<line x1=\"" + std::to_string(margin + 8) + "\" y1=\"" + std::to_string(ly) +
           "\" x2=\"" + std::to_string(margin + 36) + "\" y2=\"" + std::to_string(ly) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + std::to_string(margin + 42) + "\" y=\"" + std::to_string(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + c.label + "</text>\n";
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace aqs::pipeline
