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

// Self-contained SVG line plots. Output depends only on the input values:
// fixed viewport, fixed palette and fixed number formatting.

#ifndef PRIME_SVG_PLOT_H_
#define PRIME_SVG_PLOT_H_

#include <string>
#include <vector>

namespace prime {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  // NaN entries break the polyline.
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<PlotSeries> series;
};

inline constexpr int kPlotWidth = 800;
inline constexpr int kPlotHeight = 500;

// Throws InvalidArgument if a series has mismatched lengths, no finite
// point, or non-positive x on a log axis.
std::string RenderSvg(const PlotSpec& spec);

}  // namespace prime

#endif  // PRIME_SVG_PLOT_H_
