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


// Per-sample predictions on disk and the report bundle built from runs.
//
// An evaluated run directory holds eval/predictions.csv and eval/eval.json.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semixup/evaluate.hpp"

namespace semixup::report {

struct Predictions {
  std::vector<std::string> ids;
  std::vector<std::string> patients;
  std::vector<int> truth;
  std::vector<double> probs;  // (n, n_classes)
  int n_classes = kNumGrades;

  std::size_t size() const { return ids.size(); }
  std::vector<int> predicted() const { return evaluate::argmax_rows(probs, n_classes); }
};

void write_predictions_csv(const std::filesystem::path& path, const Predictions& p);
Predictions read_predictions_csv(const std::filesystem::path& path);

/// Writes eval/predictions.csv, eval/eval.json and the curve CSVs under run_dir.
evaluate::EvalReport write_evaluation(const std::filesystem::path& run_dir, const Predictions& p);

struct Run {
  std::string name;
  std::filesystem::path dir;
  Predictions predictions;
  evaluate::EvalReport eval;
};

/// Throws MissingRun if the directory has no evaluation.
Run load_run(const std::filesystem::path& run_dir);

/// Renders SVGs and summary.md into out_dir; returns the files written.
/// With two or more runs, every run is compared against the first.
std::vector<std::filesystem::path> render(const std::vector<Run>& runs, const std::filesystem::path& out_dir,
                                          int n_chunks = 20);

}  // namespace semixup::report
