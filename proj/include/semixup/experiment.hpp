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


// Declarative experiment description and the single-run driver shared by
// the command-line tool and the acceptance suite.

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "semixup/dataset.hpp"
#include "semixup/evaluate.hpp"
#include "semixup/network.hpp"
#include "semixup/report.hpp"
#include "semixup/trainer.hpp"

namespace semixup::experiment {

enum class Precision { kFloat, kDouble };

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "manifest"

  // Manifest source.
  std::filesystem::path manifest;
  std::filesystem::path base_dir;       // relative pair paths resolve here (default: manifest's directory)
  std::filesystem::path test_manifest;  // optional held-out test set

  // Synthetic source: a training population and an independent test population.
  int synth_per_grade = 500;
  int knees_per_patient = 2;
  int image_size = 32;
  std::uint64_t synth_seed = 7;
  int test_per_grade = 100;
  dataset::SynthParams synth;

  double labeled_fraction = 0.2;
  int n_folds = 5;
  std::uint64_t split_seed = 0;
  dataset::DataSetting setting{1, 50, 6};
};

struct GridConfig {
  std::vector<losses::Method> methods;
  std::vector<int> labels_per_grade;
  std::vector<int> unlabeled_multipliers;
  std::vector<losses::LossWeights> weights;  // Semixup sweep; empty = train.loss.weights
};

struct RunConfig {
  std::string name = "run";
  std::filesystem::path out = "runs";
  DataConfig data;
  nn::NetworkConfig network = desk_network();
  trainer::TrainConfig train = desk_training();
  std::vector<std::uint64_t> seeds = {0};
  Precision precision = Precision::kFloat;
  GridConfig grid;

  /// Small network for 32x32 synthetic data.
  static nn::NetworkConfig desk_network();
  static trainer::TrainConfig desk_training();

  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Unknown keys anywhere in the document are rejected with InvalidConfig.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

struct PreparedData {
  trainer::TrainData train;
  trainer::Samples test;  // empty when the source has no test set
};

/// The split plan is fixed by split_seed; `seed` picks the labeled subset.
PreparedData prepare_data(const DataConfig& data, std::uint64_t seed);

struct RunOutcome {
  trainer::History history;
  evaluate::EvalReport val;
  std::optional<evaluate::EvalReport> test;
  report::Predictions val_predictions;
  report::Predictions test_predictions;
};

/// Trains one seed and evaluates the selected model. With a non-empty
/// run_dir, writes config.json, the trainer outputs and eval/ (test set if
/// any, validation otherwise).
RunOutcome run_single(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& run_dir = {});
RunOutcome run_single(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
                      const std::filesystem::path& run_dir = {});

// --- dataset materialization ---------------------------------------------

inline const std::vector<std::string> kRawManifestHeader = {"id", "patient_id", "grade", "image_path"};

struct PreprocessSummary {
  int written = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  // (id, reason)
};

/// Runs the preprocessing chain for every row of a raw manifest (image paths
/// relative to the manifest's directory). Writes pairs/<id>.bin,
/// manifest.csv and skipped.csv under out_dir; failing records are skipped.
PreprocessSummary preprocess_dataset(const std::filesystem::path& raw_manifest,
                                     const std::filesystem::path& landmarks, const std::filesystem::path& out_dir);

/// Renders the synthetic populations of `data` to pair blobs plus
/// manifest.csv (and test_manifest.csv). Returns the number of pairs written.
int write_synthetic_dataset(const DataConfig& data, const std::filesystem::path& out_dir);

/// Softmax predictions of a model on a sample set.
template <typename T>
report::Predictions predict(const nn::Network<T>& net, const trainer::Samples& samples);

}  // namespace semixup::experiment
