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

#include "semixup/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"
#include "semixup/rng.hpp"

namespace semixup::evaluate {

namespace {

void check_pair(std::size_t a, std::size_t b) {
  if (a == 0) throw Error(ErrorCode::kEmptyInput, "no samples");
  if (a != b) throw Error(ErrorCode::kShapeMismatch, "length mismatch");
}

void check_binary(std::span<const int> truth, std::span<const double> scores) {
  if (truth.empty()) throw Error(ErrorCode::kEmptyInput, "no samples");
  if (truth.size() != scores.size()) throw Error(ErrorCode::kShapeMismatch, "length mismatch");
  const auto pos = std::count_if(truth.begin(), truth.end(), [](int t) { return t != 0; });
  if (pos == 0 || pos == static_cast<long>(truth.size()))
    throw Error(ErrorCode::kSingleClass, "both classes must be present");
}

// Sample order by descending score.
std::vector<std::size_t> by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Cumulative (threshold, tp, fp) at each distinct score, descending.
struct Step {
  double threshold;
  long tp;
  long fp;
};

std::vector<Step> threshold_steps(std::span<const int> truth, std::span<const double> scores) {
  const auto order = by_score_desc(scores);
  std::vector<Step> steps;
  long tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    (truth[i] != 0 ? tp : fp) += 1;
    if (k + 1 == order.size() || scores[order[k + 1]] != scores[i]) steps.push_back({scores[i], tp, fp});
  }
  return steps;
}

}  // namespace

double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  check_pair(y_true.size(), y_pred.size());
  std::map<int, std::pair<long, long>> per_class;  // hits, count
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    auto& c = per_class[y_true[i]];
    c.second += 1;
    if (y_pred[i] == y_true[i]) c.first += 1;
  }
  double sum = 0.0;
  for (const auto& [cls, hc] : per_class) sum += static_cast<double>(hc.first) / static_cast<double>(hc.second);
  return sum / static_cast<double>(per_class.size());
}

std::vector<std::vector<long>> confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                                int n_classes) {
  check_pair(y_true.size(), y_pred.size());
  std::vector<std::vector<long>> m(n_classes, std::vector<long>(n_classes, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes)
      throw Error(ErrorCode::kOutOfBounds, "label outside [0, " + std::to_string(n_classes) + ")");
    m[y_true[i]][y_pred[i]] += 1;
  }
  return m;
}

Matrix row_percentages(const std::vector<std::vector<long>>& confusion) {
  Matrix out;
  for (const auto& row : confusion) {
    const double total = static_cast<double>(std::accumulate(row.begin(), row.end(), 0L));
    std::vector<double> r(row.size(), 0.0);
    if (total > 0)
      for (std::size_t j = 0; j < row.size(); ++j) r[j] = 100.0 * static_cast<double>(row[j]) / total;
    out.push_back(std::move(r));
  }
  return out;
}

double quadratic_kappa(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  const auto o = confusion_matrix(y_true, y_pred, n_classes);
  const double n = static_cast<double>(y_true.size());
  std::vector<double> rows(n_classes, 0.0), cols(n_classes, 0.0);
  for (int i = 0; i < n_classes; ++i)
    for (int j = 0; j < n_classes; ++j) {
      rows[i] += static_cast<double>(o[i][j]);
      cols[j] += static_cast<double>(o[i][j]);
    }
  const double scale = static_cast<double>((n_classes - 1) * (n_classes - 1));
  double observed = 0.0, expected = 0.0;
  for (int i = 0; i < n_classes; ++i)
    for (int j = 0; j < n_classes; ++j) {
      const double w = static_cast<double>((i - j) * (i - j)) / scale;
      observed += w * static_cast<double>(o[i][j]);
      expected += w * rows[i] * cols[j] / n;
    }
  if (expected == 0.0) throw Error(ErrorCode::kDegenerateLabels, "expected weighted disagreement is zero");
  return 1.0 - observed / expected;
}

double mean_squared_error(std::span<const int> y_true, std::span<const int> y_pred) {
  check_pair(y_true.size(), y_pred.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_pred[i] - y_true[i];
    s += d * d;
  }
  return s / static_cast<double>(y_true.size());
}

std::vector<int> argmax_rows(std::span<const double> probs, int n_classes) {
  std::vector<int> out(probs.size() / n_classes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto row = probs.subspan(r * n_classes, n_classes);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<double> oa_detection_scores(std::span<const double> probs, int n_classes) {
  std::vector<double> out(probs.size() / n_classes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    double s = 0.0;
    for (int c = 2; c < n_classes; ++c) s += probs[r * n_classes + c];
    out[r] = s;
  }
  return out;
}

std::vector<int> oa_truth(std::span<const int> grades) {
  std::vector<int> out(grades.size());
  std::transform(grades.begin(), grades.end(), out.begin(), [](int g) { return g >= 2 ? 1 : 0; });
  return out;
}

double roc_auc(std::span<const int> truth, std::span<const double> scores) {
  check_binary(truth, scores);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Rank sum of positives with midranks; doubled so that ties stay integral.
  long long rank2_pos = 0;
  long long n_pos = 0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && scores[order[hi + 1]] == scores[order[lo]]) ++hi;
    const long long mid2 = static_cast<long long>(lo + 1 + hi + 1);
    for (std::size_t k = lo; k <= hi; ++k)
      if (truth[order[k]] != 0) {
        rank2_pos += mid2;
        ++n_pos;
      }
    lo = hi + 1;
  }
  const long long n_neg = static_cast<long long>(scores.size()) - n_pos;
  const long long u2 = rank2_pos - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pr_ap(std::span<const int> truth, std::span<const double> scores) {
  check_binary(truth, scores);
  const auto steps = threshold_steps(truth, scores);
  const double n_pos = static_cast<double>(steps.back().tp);
  double ap = 0.0;
  long prev_tp = 0;
  for (const auto& s : steps) {
    const double precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    ap += static_cast<double>(s.tp - prev_tp) / n_pos * precision;
    prev_tp = s.tp;
  }
  return ap;
}

std::vector<CurvePoint> roc_curve(std::span<const int> truth, std::span<const double> scores) {
  check_binary(truth, scores);
  const auto steps = threshold_steps(truth, scores);
  const double p = static_cast<double>(steps.back().tp);
  const double n = static_cast<double>(steps.back().fp);
  std::vector<CurvePoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  for (const auto& s : steps) out.push_back({s.threshold, s.fp / n, s.tp / p});
  return out;
}

std::vector<CurvePoint> pr_curve(std::span<const int> truth, std::span<const double> scores) {
  check_binary(truth, scores);
  const auto steps = threshold_steps(truth, scores);
  const double p = static_cast<double>(steps.back().tp);
  std::vector<CurvePoint> out{{std::numeric_limits<double>::infinity(), 0.0, 1.0}};
  for (const auto& s : steps)
    out.push_back({s.threshold, s.tp / p, static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp)});
  return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  if (d.empty()) throw Error(ErrorCode::kAllZeroDifferences, "all paired differences are zero");
  const int n = static_cast<int>(d.size());
  if (n < kMinWilcoxonPairs)
    throw Error(ErrorCode::kTooFewDifferences, std::to_string(n) + " non-zero differences, need " +
                                                   std::to_string(kMinWilcoxonPairs));

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::fabs(d[x]) < std::fabs(d[y]); });
  std::vector<int> rank2(d.size());  // doubled average ranks
  double tie_term = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && std::fabs(d[order[hi + 1]]) == std::fabs(d[order[lo]])) ++hi;
    for (std::size_t k = lo; k <= hi; ++k) rank2[order[k]] = static_cast<int>(lo + 1 + hi + 1);
    const double t = static_cast<double>(hi - lo + 1);
    tie_term += t * t * t - t;
    lo = hi + 1;
  }
  int w2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) w2 += rank2[i];

  WilcoxonResult r;
  r.n = n;
  r.w_plus = w2 / 2.0;
  if (n <= kExactWilcoxonLimit) {
    // Null distribution of the doubled statistic: each rank enters with
    // probability 1/2.
    const int max_sum = std::accumulate(rank2.begin(), rank2.end(), 0);
    std::vector<double> count(max_sum + 1, 0.0);
    count[0] = 1.0;
    int reach = 0;
    for (int r2 : rank2) {
      for (int s = reach; s >= 0; --s)
        if (count[s] != 0.0) count[s + r2] += count[s];
      reach += r2;
    }
    double tail = 0.0;
    for (int s = w2; s <= max_sum; ++s) tail += count[s];
    r.exact = true;
    r.p_value = tail / std::ldexp(1.0, n);
  } else {
    const double nn = n;
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (r.w_plus - mean) / std::sqrt(var);
    r.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  }
  return r;
}

double wilcoxon_one_sided(std::span<const double> a, std::span<const double> b) {
  return wilcoxon_signed_rank(a, b).p_value;
}

std::vector<int> assign_chunks(std::span<const std::string> patient_ids, int n_chunks) {
  if (n_chunks <= 0) throw Error(ErrorCode::kInvalidConfig, "n_chunks must be positive");
  std::vector<std::string> patients(patient_ids.begin(), patient_ids.end());
  std::sort(patients.begin(), patients.end());
  patients.erase(std::unique(patients.begin(), patients.end()), patients.end());
  if (static_cast<int>(patients.size()) < n_chunks)
    throw Error(ErrorCode::kInsufficientData, std::to_string(patients.size()) + " patients for " +
                                                  std::to_string(n_chunks) + " chunks");
  std::sort(patients.begin(), patients.end(), [](const std::string& x, const std::string& y) {
    return std::make_tuple(stable_hash(x), std::cref(x)) < std::make_tuple(stable_hash(y), std::cref(y));
  });
  std::map<std::string, int> chunk_of;
  for (std::size_t i = 0; i < patients.size(); ++i) chunk_of[patients[i]] = static_cast<int>(i % n_chunks);
  std::vector<int> out(patient_ids.size());
  for (std::size_t i = 0; i < patient_ids.size(); ++i) out[i] = chunk_of[patient_ids[i]];
  return out;
}

ChunkedComparison chunked_compare(std::span<const int> preds_a, std::span<const int> preds_b,
                                  std::span<const int> truths, std::span<const std::string> patient_ids,
                                  int n_chunks) {
  check_pair(truths.size(), preds_a.size());
  check_pair(truths.size(), preds_b.size());
  check_pair(truths.size(), patient_ids.size());
  const auto chunk = assign_chunks(patient_ids, n_chunks);
  ChunkedComparison out;
  for (int c = 0; c < n_chunks; ++c) {
    std::vector<int> t, pa, pb;
    for (std::size_t i = 0; i < truths.size(); ++i)
      if (chunk[i] == c) {
        t.push_back(truths[i]);
        pa.push_back(preds_a[i]);
        pb.push_back(preds_b[i]);
      }
    out.ba_a.push_back(balanced_accuracy(t, pa));
    out.ba_b.push_back(balanced_accuracy(t, pb));
  }
  try {
    out.p_value = wilcoxon_one_sided(out.ba_a, out.ba_b);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAllZeroDifferences && e.code() != ErrorCode::kTooFewDifferences) throw;
    out.note = std::string("not significant (") + to_string(e.code()) + ")";
  }
  return out;
}

EvalReport evaluate_predictions(std::span<const int> y_true, std::span<const double> probs, int n_classes) {
  if (probs.size() != y_true.size() * static_cast<std::size_t>(n_classes))
    throw Error(ErrorCode::kShapeMismatch, "probabilities do not match labels");
  EvalReport r;
  const auto pred = argmax_rows(probs, n_classes);
  r.n = static_cast<int>(y_true.size());
  r.ba = balanced_accuracy(y_true, pred);
  try {
    r.kappa = quadratic_kappa(y_true, pred, n_classes);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateLabels) throw;
    r.kappa = 0.0;
  }
  r.mse = mean_squared_error(y_true, pred);
  r.confusion = confusion_matrix(y_true, pred, n_classes);
  r.confusion_pct = row_percentages(r.confusion);
  const auto truth = oa_truth(y_true);
  const auto scores = oa_detection_scores(probs, n_classes);
  const auto pos = std::count(truth.begin(), truth.end(), 1);
  if (pos > 0 && pos < static_cast<long>(truth.size())) {
    r.auc = roc_auc(truth, scores);
    r.ap = pr_ap(truth, scores);
    r.roc = roc_curve(truth, scores);
    r.pr = pr_curve(truth, scores);
  }
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = {{"ba", r.ba},
                      {"kappa", r.kappa},
                      {"mse", r.mse},
                      {"confusion", r.confusion},
                      {"confusion_pct", r.confusion_pct},
                      {"n", r.n}};
  j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
  j["ap"] = r.ap ? nlohmann::json(*r.ap) : nlohmann::json(nullptr);
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.ba = j.at("ba").get<double>();
  r.kappa = j.at("kappa").get<double>();
  r.mse = j.at("mse").get<double>();
  r.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
  r.confusion_pct = j.at("confusion_pct").get<Matrix>();
  r.n = j.at("n").get<int>();
  if (!j.at("auc").is_null()) r.auc = j["auc"].get<double>();
  if (!j.at("ap").is_null()) r.ap = j["ap"].get<double>();
  return r;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve,
                     const std::string& x_name, const std::string& y_name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv_row(out, {"threshold", x_name, y_name});
  for (const auto& p : curve)
    write_csv_row(out, {std::isinf(p.threshold) ? "inf" : format_double(p.threshold), format_double(p.x),
                        format_double(p.y)});
}

}  // namespace semixup::evaluate
