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

#include "semixup/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"
#include "semixup/rng.hpp"

namespace semixup::dataset {

namespace {

using GradeCounts = std::array<long, kNumGrades>;

struct Patient {
  std::string id;
  std::vector<std::size_t> records;
  GradeCounts grades{};
  std::uint64_t order_key = 0;
};

// Assigns every patient to one of `fractions.size()` partitions so that each
// partition's per-grade count tracks fraction * grade total.
std::vector<int> deficit_partition(const std::vector<Patient>& patients, const std::vector<double>& fractions) {
  GradeCounts totals{};
  for (const auto& p : patients)
    for (int g = 0; g < kNumGrades; ++g) totals[g] += p.grades[g];

  const std::size_t n_parts = fractions.size();
  std::vector<std::array<double, kNumGrades>> target(n_parts);
  for (std::size_t k = 0; k < n_parts; ++k)
    for (int g = 0; g < kNumGrades; ++g) target[k][g] = fractions[k] * static_cast<double>(totals[g]);

  std::vector<std::size_t> order(patients.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = patients[a];
    const auto& pb = patients[b];
    if (pa.records.size() != pb.records.size()) return pa.records.size() > pb.records.size();
    if (pa.order_key != pb.order_key) return pa.order_key < pb.order_key;
    return pa.id < pb.id;
  });

  std::vector<std::array<double, kNumGrades>> count(n_parts, std::array<double, kNumGrades>{});
  std::vector<int> assignment(patients.size(), 0);
  for (std::size_t idx : order) {
    const auto& p = patients[idx];
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t k = 0; k < n_parts; ++k) {
      double deficit = 0.0;
      for (int g = 0; g < kNumGrades; ++g)
        if (p.grades[g] > 0) deficit += static_cast<double>(p.grades[g]) * (target[k][g] - count[k][g]);
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = k;
      }
    }
    assignment[idx] = static_cast<int>(best);
    for (int g = 0; g < kNumGrades; ++g) count[best][g] += static_cast<double>(p.grades[g]);
  }
  return assignment;
}

std::vector<Patient> group_patients(const std::vector<Record>& records, const std::vector<std::size_t>& subset,
                                    std::uint64_t seed) {
  std::map<std::string, Patient> by_id;
  for (std::size_t i : subset) {
    const Record& r = records[i];
    Patient& p = by_id[r.patient_id];
    p.id = r.patient_id;
    p.records.push_back(i);
    p.grades[*r.grade] += 1;
  }
  std::vector<Patient> out;
  out.reserve(by_id.size());
  for (auto& [id, p] : by_id) {
    p.order_key = stable_hash(id, seed);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> ids_of(const std::vector<Record>& records, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(records[i].id);
  return out;
}

std::vector<std::vector<std::string>> split_folds(const std::vector<Record>& records,
                                                  const std::vector<std::size_t>& pool, int n_folds,
                                                  std::uint64_t seed) {
  const auto patients = group_patients(records, pool, seed);
  const auto assignment = deficit_partition(patients, std::vector<double>(n_folds, 1.0 / n_folds));
  std::vector<std::vector<std::size_t>> idx(n_folds);
  for (std::size_t p = 0; p < patients.size(); ++p)
    for (std::size_t r : patients[p].records) idx[assignment[p]].push_back(r);
  std::vector<std::vector<std::string>> folds;
  for (auto& f : idx) folds.push_back(ids_of(records, std::move(f)));
  return folds;
}

}  // namespace

nlohmann::json to_json(const SplitPlan& plan) {
  return {{"labeled_pool", plan.labeled_pool},
          {"unlabeled_pool", plan.unlabeled_pool},
          {"labeled_folds", plan.labeled_folds},
          {"unlabeled_folds", plan.unlabeled_folds}};
}

SplitPlan split_plan_from_json(const nlohmann::json& j) {
  SplitPlan plan;
  try {
    j.at("labeled_pool").get_to(plan.labeled_pool);
    j.at("unlabeled_pool").get_to(plan.unlabeled_pool);
    j.at("labeled_folds").get_to(plan.labeled_folds);
    j.at("unlabeled_folds").get_to(plan.unlabeled_folds);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("split plan: ") + e.what());
  }
  return plan;
}

SplitPlan stratified_split(const std::vector<Record>& records, double labeled_fraction, int n_folds,
                           std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction < 1.0))
    throw Error(ErrorCode::kInvalidConfig, "labeled fraction must be in (0, 1)");
  if (n_folds < 1) throw Error(ErrorCode::kInvalidConfig, "n_folds must be positive");

  GradeCounts per_grade{};
  for (const auto& r : records) {
    if (!r.grade) throw Error(ErrorCode::kInsufficientData, "record '" + r.id + "' has no grade");
    if (r.patient_id.empty()) throw Error(ErrorCode::kInsufficientData, "record '" + r.id + "' has no patient id");
    per_grade[*r.grade] += 1;
  }
  for (int g = 0; g < kNumGrades; ++g)
    if (per_grade[g] < n_folds)
      throw Error(ErrorCode::kInsufficientData,
                  "grade " + std::to_string(g) + " has " + std::to_string(per_grade[g]) + " records, need " +
                      std::to_string(n_folds));

  std::vector<std::size_t> all(records.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto patients = group_patients(records, all, seed);
  const auto pool_of = deficit_partition(patients, {labeled_fraction, 1.0 - labeled_fraction});

  std::vector<std::size_t> labeled, unlabeled;
  for (std::size_t p = 0; p < patients.size(); ++p)
    for (std::size_t r : patients[p].records) (pool_of[p] == 0 ? labeled : unlabeled).push_back(r);

  SplitPlan plan;
  plan.labeled_pool = ids_of(records, labeled);
  plan.unlabeled_pool = ids_of(records, unlabeled);
  plan.labeled_folds = split_folds(records, labeled, n_folds, derive_seed(seed, 1));
  plan.unlabeled_folds = split_folds(records, unlabeled, n_folds, derive_seed(seed, 2));
  return plan;
}

RealizedSetting realize_setting(const std::vector<Record>& records, const SplitPlan& plan,
                                const DataSetting& setting, std::uint64_t seed) {
  const int n_folds = static_cast<int>(plan.labeled_folds.size());
  if (setting.fold < 1 || setting.fold > n_folds || plan.unlabeled_folds.size() != plan.labeled_folds.size())
    throw Error(ErrorCode::kInvalidConfig, "fold " + std::to_string(setting.fold) + " not in plan");
  if (setting.labels_per_grade < 1 || setting.unlabeled_multiplier < 0)
    throw Error(ErrorCode::kInvalidConfig, "labels_per_grade must be >= 1 and multiplier >= 0");

  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!by_id.emplace(records[i].id, i).second)
      throw Error(ErrorCode::kParseError, "duplicate record id '" + records[i].id + "'");
  auto lookup = [&](const std::string& id) -> const Record& {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::kInsufficientData, "plan references unknown record '" + id + "'");
    return records[it->second];
  };

  const int k = setting.fold - 1;
  RealizedSetting out;

  std::array<std::vector<std::string>, kNumGrades> train_by_grade;
  for (int f = 0; f < n_folds; ++f) {
    for (const auto& id : plan.labeled_folds[f]) {
      const Record& r = lookup(id);
      if (f == k) {
        out.val.push_back(r);
      } else {
        train_by_grade[*r.grade].push_back(id);
      }
    }
  }
  Rng rng(derive_seed(seed, 0x5e77));
  for (int g = 0; g < kNumGrades; ++g) {
    auto& ids = train_by_grade[g];
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids.begin(), ids.end());
    if (static_cast<int>(ids.size()) < setting.labels_per_grade)
      throw Error(ErrorCode::kInsufficientData, "grade " + std::to_string(g) + " has " + std::to_string(ids.size()) +
                                                    " labeled candidates, need " +
                                                    std::to_string(setting.labels_per_grade));
    for (int i = 0; i < setting.labels_per_grade; ++i) out.labeled.push_back(lookup(ids[i]));
  }

  std::vector<std::string> ul;
  for (int f = 0; f < n_folds; ++f)
    if (f != k) ul.insert(ul.end(), plan.unlabeled_folds[f].begin(), plan.unlabeled_folds[f].end());
  std::sort(ul.begin(), ul.end());
  rng.shuffle(ul.begin(), ul.end());
  const auto need = static_cast<std::size_t>(setting.unlabeled_count());
  if (ul.size() < need)
    throw Error(ErrorCode::kInsufficientData,
                "unlabeled pool has " + std::to_string(ul.size()) + " records, need " + std::to_string(need));
  for (std::size_t i = 0; i < need; ++i) {
    Record r = lookup(ul[i]);
    r.grade.reset();
    out.unlabeled.push_back(std::move(r));
  }
  return out;
}

// --- synthetic ordinal images --------------------------------------------

double nominal_gap_width(int grade, int size) { return size * (0.30 - 0.05 * grade); }

PatchPair synth_generate(int grade, std::uint64_t seed, int size, const SynthParams& params) {
  if (grade < 0 || grade >= kNumGrades) throw Error(ErrorCode::kInvalidConfig, "grade out of range");
  if (size < 16) throw Error(ErrorCode::kInvalidConfig, "synthetic size must be >= 16");
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(grade), static_cast<std::uint64_t>(size)));
  PatchPair pair(size);
  const double half = size / 2.0;

  for (ImageF* patch : {&pair.lateral, &pair.medial}) {
    const double center_y = half + rng.uniform(-1.0, 1.0) * size * 0.06;
    const double tilt = rng.uniform(-0.05, 0.05);
    const double gap = std::max(1.0, nominal_gap_width(grade, size) * (1.0 + params.gap_jitter * rng.normal()));
    const double bone_top = rng.uniform(0.25, 0.55);
    const double bone_bottom = rng.uniform(0.25, 0.55);
    const double space = -0.7 + rng.uniform(-0.1, 0.1);
    const double edge_softness = 0.6;

    std::vector<double> v(static_cast<std::size_t>(size) * size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double d = y - (center_y + tilt * (x - half));
        const double t = 1.0 / (1.0 + std::exp(-(std::abs(d) - gap / 2.0) / edge_softness));
        const double bone = (d < 0 ? bone_top : bone_bottom) * (1.0 - 0.6 * std::abs(d) / size);
        v[static_cast<std::size_t>(y) * size + x] = space + (bone - space) * t;
      }
    }

    for (int b = 0; b < grade; ++b) {
      const double bx = rng.uniform(0.1, 0.9) * size;
      const double sign = rng.bernoulli(0.5) ? -1.0 : 1.0;
      const double by = center_y + tilt * (bx - half) + sign * gap / 2.0;
      const double r = params.blob_radius * size * rng.uniform(0.8, 1.2);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          const double dd = (x - bx) * (x - bx) + (y - by) * (y - by);
          v[static_cast<std::size_t>(y) * size + x] += 0.6 * std::exp(-dd / (2.0 * r * r));
        }
      }
    }

    for (std::size_t i = 0; i < v.size(); ++i) {
      double val = v[i];
      if (params.noise_sigma > 0.0) val += rng.normal(0.0, params.noise_sigma);
      patch->data[i] = static_cast<float>(std::clamp(val, -1.0, 1.0));
    }
  }
  return pair;
}

std::vector<Record> synth_population(int n_per_grade, int knees_per_patient, int size, std::uint64_t seed,
                                     const std::string& id_prefix) {
  if (knees_per_patient < 1) throw Error(ErrorCode::kInvalidConfig, "knees_per_patient must be >= 1");
  std::vector<Record> out;
  out.reserve(static_cast<std::size_t>(n_per_grade) * kNumGrades);
  long patient = 0;
  for (int g = 0; g < kNumGrades; ++g) {
    for (int i = 0; i < n_per_grade; ++i) {
      if (i % knees_per_patient == 0) ++patient;
      const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(i));
      Record r;
      r.id = id_prefix + std::to_string(g) + "_" + std::to_string(i);
      r.patient_id = id_prefix + "p" + std::to_string(patient);
      r.grade = g;
      r.pair_path = "synth:" + std::to_string(g) + ":" + std::to_string(s) + ":" + std::to_string(size);
      out.push_back(std::move(r));
    }
  }
  return out;
}

PatchPair load_pair(const Record& record, const std::filesystem::path& base_dir, const SynthParams& params) {
  const std::string& p = record.pair_path;
  if (p.rfind("synth:", 0) == 0) {
    const auto a = p.find(':', 6);
    const auto b = a == std::string::npos ? a : p.find(':', a + 1);
    if (b == std::string::npos) throw Error(ErrorCode::kParseError, "bad synthetic descriptor '" + p + "'");
    const int grade = static_cast<int>(parse_int(p.substr(6, a - 6)));
    const auto seed = static_cast<std::uint64_t>(std::stoull(p.substr(a + 1, b - a - 1)));
    const int size = static_cast<int>(parse_int(p.substr(b + 1)));
    return synth_generate(grade, seed, size, params);
  }
  std::filesystem::path path(p);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return read_pair_blob(path);
}

// --- manifests -------------------------------------------------------------

std::vector<Record> load_manifest(const std::filesystem::path& path, bool eager_validation) {
  const CsvTable table = read_csv(path, kManifestHeader);
  std::vector<Record> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = path.string() + ": line " + std::to_string(table.line_numbers[i]);
    Record r{row[0], row[1], std::nullopt, row[3]};
    if (r.id.empty()) throw Error(ErrorCode::kParseError, where + ": empty id");
    if (!row[2].empty()) {
      long long g = -1;
      try {
        g = parse_int(row[2]);
      } catch (const Error&) {
        throw Error(ErrorCode::kParseError, where + ": grade '" + row[2] + "' is not an integer");
      }
      if (g < 0 || g >= kNumGrades)
        throw Error(ErrorCode::kParseError, where + ": grade " + row[2] + " outside 0..4 (record '" + r.id + "')");
      r.grade = static_cast<int>(g);
    }
    if (eager_validation && r.pair_path.rfind("synth:", 0) != 0) {
      std::filesystem::path pp(r.pair_path);
      if (pp.is_relative()) pp = path.parent_path() / pp;
      if (!std::filesystem::exists(pp)) throw Error(ErrorCode::kMissingFile, where + ": " + pp.string());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv_row(out, kManifestHeader);
  for (const auto& r : records)
    write_csv_row(out, {r.id, r.patient_id, r.grade ? std::to_string(*r.grade) : "", r.pair_path});
}

}  // namespace semixup::dataset
