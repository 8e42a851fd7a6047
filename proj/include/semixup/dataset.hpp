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

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "semixup/patch.hpp"

namespace semixup::dataset {

struct Record {
  std::string id;
  std::string patient_id;
  std::optional<int> grade;
  std::string pair_path;  // blob file, or "synth:<grade>:<seed>:<size>"

  friend bool operator==(const Record&, const Record&) = default;
};

/// One cell of the experiment grid.
struct DataSetting {
  int fold = 1;  // 1-based, selects the held-out fold
  int labels_per_grade = 50;
  int unlabeled_multiplier = 1;

  int labeled_count() const { return labels_per_grade * kNumGrades; }
  int unlabeled_count() const { return unlabeled_multiplier * labeled_count(); }
};

/// Patient-disjoint labeled/unlabeled pools, each divided into folds.
struct SplitPlan {
  std::vector<std::string> labeled_pool;
  std::vector<std::string> unlabeled_pool;
  std::vector<std::vector<std::string>> labeled_folds;
  std::vector<std::vector<std::string>> unlabeled_folds;
};

nlohmann::json to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const nlohmann::json& j);

/// Greedy deficit-filling stratification over patients. Patients are visited
/// largest-first and then by a seeded hash of their id; each goes to the
/// partition with the largest remaining per-grade deficit for its knees.
SplitPlan stratified_split(const std::vector<Record>& records, double labeled_fraction, int n_folds,
                           std::uint64_t seed);

struct RealizedSetting {
  std::vector<Record> labeled;    // exactly labels_per_grade per grade
  std::vector<Record> unlabeled;  // grades stripped
  std::vector<Record> val;        // held-out labeled fold
};

RealizedSetting realize_setting(const std::vector<Record>& records, const SplitPlan& plan,
                                const DataSetting& setting, std::uint64_t seed);

// --- synthetic ordinal images --------------------------------------------

struct SynthParams {
  double noise_sigma = 0.25;      // pixel noise on the [-1, 1] scale; 0 disables
  double gap_jitter = 0.14;       // relative std of the joint-space width
  double blob_radius = 0.045;     // relative to the patch side
};

/// Joint-space width in pixels before jitter; strictly decreasing in grade.
double nominal_gap_width(int grade, int size);

/// Procedural knee-like pair: dark joint-space band between two bright bone
/// regions, gap narrowing with grade, `grade` bright osteophyte blobs on the
/// band edges of each patch, plus Gaussian noise.
PatchPair synth_generate(int grade, std::uint64_t seed, int size = 64, const SynthParams& params = {});

/// `n_per_grade` records per grade, `knees_per_patient` knees (of the same
/// grade) per synthetic patient.
std::vector<Record> synth_population(int n_per_grade, int knees_per_patient, int size, std::uint64_t seed,
                                     const std::string& id_prefix = "s");

/// Resolves a record's pair: synthetic descriptor or blob file (relative
/// paths are taken against `base_dir`).
PatchPair load_pair(const Record& record, const std::filesystem::path& base_dir = {},
                    const SynthParams& params = {});

// --- manifests -------------------------------------------------------------

inline const std::vector<std::string> kManifestHeader = {"id", "patient_id", "grade", "pair_path"};

/// With `eager_validation`, every non-synthetic pair_path must exist.
std::vector<Record> load_manifest(const std::filesystem::path& path, bool eager_validation = false);
void save_manifest(const std::filesystem::path& path, const std::vector<Record>& records);

}  // namespace semixup::dataset
