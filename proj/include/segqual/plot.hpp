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

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace segqual::plot {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
};

std::string line_plot(const Axes& axes, const std::vector<Series>& series);

/// Bars between consecutive edges; bars left of zero are hatched red.
std::string histogram(const Axes& axes, const std::vector<double>& edges,
                      const std::vector<double>& counts);

}  // namespace segqual::plot
