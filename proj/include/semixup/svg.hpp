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


// Small deterministic SVG renderers. Numbers are printed with fixed
// precision so a re-render is byte-identical.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semixup/evaluate.hpp"

namespace semixup::svg {

/// Heatmap of row percentages with the raw counts printed in each cell.
std::string confusion_heatmap(const std::vector<std::vector<long>>& counts, const std::string& title);

/// ROC or PR curve in the unit square. `diagonal` draws the chance line.
std::string curve_plot(const std::vector<evaluate::CurvePoint>& curve, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool diagonal,
                       std::optional<double> area = std::nullopt);

struct Bar {
  std::string label;
  double mean = 0.0;
  double se = 0.0;      // drawn as +/- one standard error
  std::string marker;   // significance stars, may be empty
};

std::string bar_chart(const std::vector<Bar>& bars, const std::string& title, const std::string& y_label);

/// "*", "**", "***" for p below 0.05, 0.01, 0.001; empty otherwise.
std::string stars(std::optional<double> p);

std::string escape(const std::string& text);

}  // namespace semixup::svg
