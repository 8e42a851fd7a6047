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

// Grading metrics and the chunked paired comparison between two models.

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semixup/patch.hpp"

namespace semixup::evaluate {

using Matrix = std::vector<std::vector<double>>;

/// Mean per-class recall over the classes present in `y_true`.
double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred);

/// Counts indexed [truth][prediction].
std::vector<std::vector<long>> confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                                int n_classes = kNumGrades);
/// Rows scaled to percentages; empty rows stay zero.
Matrix row_percentages(const std::vector<std::vector<long>>& confusion);

/// Cohen's kappa with quadratic weights. Throws DegenerateLabels when the
/// expected disagreement is zero.
double quadratic_kappa(std::span<const int> y_true, std::span<const int> y_pred, int n_classes = kNumGrades);

double mean_squared_error(std::span<const int> y_true, std::span<const int> y_pred);

/// argmax of each row of a (rows, n_classes) probability matrix.
std::vector<int> argmax_rows(std::span<const double> probs, int n_classes = kNumGrades);

/// p2 + p3 + p4 per row: the probability of grade >= 2.
std::vector<double> oa_detection_scores(std::span<const double> probs, int n_classes = kNumGrades);
std::vector<int> oa_truth(std::span<const int> grades);

/// Mann-Whitney AUC with tie midranks. Throws SingleClass.
double roc_auc(std::span<const int> truth, std::span<const double> scores);
/// Step-wise average precision over distinct thresholds. Throws SingleClass.
double pr_ap(std::span<const int> truth, std::span<const double> scores);

struct CurvePoint {
  double threshold;
  double x;  // FPR for ROC, recall for PR
  double y;  // TPR for ROC, precision for PR
};

std::vector<CurvePoint> roc_curve(std::span<const int> truth, std::span<const double> scores);
std::vector<CurvePoint> pr_curve(std::span<const int> truth, std::span<const double> scores);

struct WilcoxonResult {
  double w_plus = 0.0;  // sum of ranks of positive differences
  int n = 0;            // non-zero differences
  bool exact = false;
  double p_value = 1.0;
};

/// One-sided signed-rank test of a > b. Zero differences are dropped; tied
/// magnitudes share their average rank. Exact null distribution for n <= 25,
/// tie-corrected normal approximation above. Throws AllZeroDifferences, or
/// TooFewDifferences when fewer than 5 non-zero differences remain.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);
double wilcoxon_one_sided(std::span<const double> a, std::span<const double> b);

inline constexpr int kExactWilcoxonLimit = 25;
inline constexpr int kMinWilcoxonPairs = 5;

/// Patient-disjoint chunk index per sample: patients sorted by a stable hash
/// of their id and dealt round-robin.
std::vector<int> assign_chunks(std::span<const std::string> patient_ids, int n_chunks);

struct ChunkedComparison {
  std::vector<double> ba_a;
  std::vector<double> ba_b;
  std::optional<double> p_value;  // empty when the test is undefined
  std::string note;

  bool significant(double level = 0.05) const { return p_value && *p_value < level; }
};

ChunkedComparison chunked_compare(std::span<const int> preds_a, std::span<const int> preds_b,
                                  std::span<const int> truths, std::span<const std::string> patient_ids,
                                  int n_chunks = 20);

struct EvalReport {
  double ba = 0.0;
  double kappa = 0.0;
  double mse = 0.0;
  std::vector<std::vector<long>> confusion;
  Matrix confusion_pct;
  std::optional<double> auc;
  std::optional<double> ap;
  int n = 0;
  std::vector<CurvePoint> roc;
  std::vector<CurvePoint> pr;
};

/// Full report from integer truths and a (n, n_classes) probability matrix.
EvalReport evaluate_predictions(std::span<const int> y_true, std::span<const double> probs,
                                int n_classes = kNumGrades);

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve,
                     const std::string& x_name, const std::string& y_name);

}  // namespace semixup::evaluate
