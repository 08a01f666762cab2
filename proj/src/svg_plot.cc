// Copyright 2026 The Prime Authors
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

#include "prime/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "prime/errors.h"

namespace prime {
namespace {

constexpr double kLeft = 80.0;
constexpr double kRight = 190.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;
constexpr int kTicks = 5;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string Fixed(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string Label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4g", v);
  return buffer;
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void Add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Widens degenerate ranges so the mapping stays finite.
  void Pad() {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      const double d = std::max(1.0, std::abs(hi)) * 0.5;
      lo -= d;
      hi += d;
    }
  }
};

std::string Text(double x, double y, const std::string& anchor,
                 const std::string& body, const std::string& extra = "") {
  return "<text x=\"" + Fixed(x) + "\" y=\"" + Fixed(y) + "\" text-anchor=\"" +
         anchor + "\"" + extra + ">" + Escape(body) + "</text>\n";
}

}  // namespace

std::string RenderSvg(const PlotSpec& spec) {
  Range xr, yr;
  for (const PlotSeries& s : spec.series) {
    if (s.x.size() != s.y.size()) {
      throw InvalidArgument("RenderSvg: series \"" + s.label +
                            "\" has mismatched x and y");
    }
    bool any = false;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (spec.log_x && !(s.x[i] > 0.0)) {
        throw InvalidArgument("RenderSvg: non-positive x on a log axis");
      }
      xr.Add(spec.log_x ? std::log10(s.x[i]) : s.x[i]);
      yr.Add(s.y[i]);
      any = true;
    }
    if (!any) {
      throw InvalidArgument("RenderSvg: series \"" + s.label +
                            "\" has no finite point");
    }
  }
  if (spec.series.empty()) throw InvalidArgument("RenderSvg: no series");
  const Range x_data = xr, y_data = yr;
  xr.Pad();
  yr.Pad();
  const double w = kPlotWidth - kLeft - kRight;
  const double h = kPlotHeight - kTop - kBottom;
  const auto px = [&](double x) {
    const double u = spec.log_x ? std::log10(x) : x;
    return kLeft + (u - xr.lo) / (xr.hi - xr.lo) * w;
  };
  const auto py = [&](double y) {
    return kTop + (yr.hi - y) / (yr.hi - yr.lo) * h;
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(kPlotWidth) + "\" height=\"" +
                    std::to_string(kPlotHeight) + "\" viewBox=\"0 0 " +
                    std::to_string(kPlotWidth) + " " +
                    std::to_string(kPlotHeight) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg +=
      Text(kPlotWidth / 2.0, 24.0, "middle", spec.title, " font-size=\"16\"");
  svg += "<rect x=\"" + Fixed(kLeft) + "\" y=\"" + Fixed(kTop) + "\" width=\"" +
         Fixed(w) + "\" height=\"" + Fixed(h) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / kTicks;
    const double gx = kLeft + w * i / kTicks;
    svg += "<line x1=\"" + Fixed(gx) + "\" y1=\"" + Fixed(kTop + h) +
           "\" x2=\"" + Fixed(gx) + "\" y2=\"" + Fixed(kTop + h + 5) +
           "\" stroke=\"black\"/>\n";
    svg += Text(gx, kTop + h + 18, "middle",
                Label(spec.log_x ? std::pow(10.0, fx) : fx));
    const double fy = yr.lo + (yr.hi - yr.lo) * i / kTicks;
    const double gy = kTop + h - h * i / kTicks;
    svg += "<line x1=\"" + Fixed(kLeft - 5) + "\" y1=\"" + Fixed(gy) +
           "\" x2=\"" + Fixed(kLeft) + "\" y2=\"" + Fixed(gy) +
           "\" stroke=\"black\"/>\n";
    svg += Text(kLeft - 8, gy + 4, "end", Label(fy));
  }
  svg += Text(kLeft + w / 2, kPlotHeight - 30.0, "middle",
              spec.x_label + (spec.log_x ? " (log)" : ""));
  svg += Text(16.0, kTop + h / 2, "middle", spec.y_label,
              " transform=\"rotate(-90 16 " + Fixed(kTop + h / 2) + ")\"");
  const double x_lo = spec.log_x ? std::pow(10.0, x_data.lo) : x_data.lo;
  const double x_hi = spec.log_x ? std::pow(10.0, x_data.hi) : x_data.hi;
  svg += Text(kLeft, kPlotHeight - 8.0, "start",
              "data range: x [" + Label(x_lo) + ", " + Label(x_hi) + "], y [" +
                  Label(y_data.lo) + ", " + Label(y_data.hi) + "]",
              " font-size=\"10\" fill=\"#555555\"");

  const size_t colors = sizeof(kPalette) / sizeof(kPalette[0]);
  for (size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& series = spec.series[s];
    const std::string color = kPalette[s % colors];
    std::string points;
    auto flush = [&]() {
      if (points.empty()) return;
      svg += "<polyline fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
      points.clear();
    };
    for (size_t i = 0; i < series.x.size(); ++i) {
      if (!std::isfinite(series.x[i]) || !std::isfinite(series.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points.push_back(' ');
      points += Fixed(px(series.x[i])) + "," + Fixed(py(series.y[i]));
    }
    flush();
    const double ly = kTop + 10.0 + 20.0 * s;
    const double lx = kPlotWidth - kRight + 15.0;
    svg += "<line x1=\"" + Fixed(lx) + "\" y1=\"" + Fixed(ly) + "\" x2=\"" +
           Fixed(lx + 25) + "\" y2=\"" + Fixed(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += Text(lx + 32, ly + 4, "start", series.label);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace prime
