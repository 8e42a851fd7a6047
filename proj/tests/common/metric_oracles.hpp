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


// Brute-force reference implementations of the grading metrics. They trade
// speed for directness and share no code with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

namespace semixup::oracle {

inline double balanced_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  std::set<int> classes(truth.begin(), truth.end());
  double sum = 0.0;
  for (int c : classes) {
    int total = 0, hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i] == c) {
        ++total;
        hit += pred[i] == c;
      }
    sum += static_cast<double>(hit) / total;
  }
  return sum / static_cast<double>(classes.size());
}

inline double quadratic_kappa(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
  std::vector<std::vector<double>> observed(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < truth.size(); ++i) observed[truth[i]][pred[i]] += 1.0;
  const double n = static_cast<double>(truth.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double row = 0.0, col = 0.0;
      for (int m = 0; m < k; ++m) {
        row += observed[i][m];
        col += observed[m][j];
      }
      const double w = static_cast<double>((i - j) * (i - j)) / ((k - 1) * (k - 1));
      num += w * observed[i][j];
      den += w * row * col / n;
    }
  return 1.0 - num / den;
}

/// Probability that a random positive outranks a random negative, ties half.
inline double auc_pairs(const std::vector<int>& truth, const std::vector<double>& score) {
  double good = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0) continue;
      ++pairs;
      if (score[i] > score[j]) good += 1.0;
      else if (score[i] == score[j]) good += 0.5;
    }
  }
  return good / static_cast<double>(pairs);
}

/// Sum over distinct thresholds (high to low) of recall increment times
/// precision, counting everything at or above the threshold as positive.
inline double average_precision(const std::vector<int>& truth, const std::vector<double>& score) {
  std::vector<double> thresholds(score.begin(), score.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double positives = 0.0;
  for (int t : truth) positives += t;
  double ap = 0.0, last_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (score[i] >= t) (truth[i] == 1 ? tp : fp) += 1.0;
    const double recall = tp / positives;
    ap += (recall - last_recall) * tp / (tp + fp);
    last_recall = recall;
  }
  return ap;
}

/// Exact one-sided signed-rank p-value P(W+ >= observed) by visiting all 2^n
/// sign patterns in Gray-code order.
inline double wilcoxon_enumerated(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
  const std::size_t n = diff.size();
  // Average ranks of |d| by direct counting.
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(diff[j]) < std::abs(diff[i])) below += 1.0;
      else if (std::abs(diff[j]) == std::abs(diff[i])) equal += 1.0;
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diff[i] > 0) observed += rank[i];
  // Ranks are multiples of 1/2, so doubled sums are exact integers.
  const auto twice = [](double r) { return static_cast<std::int64_t>(std::llround(2.0 * r)); };
  const std::int64_t target = twice(observed);
  std::int64_t w = 0;
  std::uint64_t count = 0, code = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 0; k < total; ++k) {
    if (k > 0) {
      const int bit = __builtin_ctzll(k);
      code ^= std::uint64_t{1} << bit;
      w += (code >> bit & 1) ? twice(rank[bit]) : -twice(rank[bit]);
    }
    if (w >= target) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace semixup::oracle
