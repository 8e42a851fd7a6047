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

// Adam, the epoch loop and model selection.
//
// An epoch is one pass over the labeled set in batches of Nb (the last batch
// wraps around to the start). The unlabeled stream is the unlabeled set plus
// the labeled images without grades; it is consumed Nb at a time, reshuffled
// at every pass and never reset at epoch boundaries. Every random draw of a
// step comes from a seed derived from (seed, epoch, step).

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "semixup/dataset.hpp"
#include "semixup/losses.hpp"
#include "semixup/network.hpp"

namespace semixup::trainer {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;
};

/// One bias-corrected Adam update from params.grad, no weight decay. Throws
/// NonFiniteGradient (parameters untouched) if any gradient is NaN or Inf.
template <typename T>
void adam_step(nn::NetworkParams<T>& params, AdamState<T>& state, const AdamConfig& config);

struct TrainConfig {
  losses::Method method = losses::Method::kSemixup;
  double lr = 1e-4;
  int batch_size = 40;
  int epochs = 500;
  int val_every = 1;
  std::uint64_t seed = 0;
  losses::LossConfig loss;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Reads the keys it knows and rejects the rest.
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Images and labels in memory.
struct Samples {
  std::vector<PatchPair> x;
  std::vector<int> y;  // empty for unlabeled data
  std::vector<std::string> ids;
  std::vector<std::string> patients;

  std::size_t size() const { return x.size(); }
};

Samples load_samples(const std::vector<dataset::Record>& records, const std::filesystem::path& base_dir = {},
                     const dataset::SynthParams& synth = {});

struct TrainData {
  Samples labeled;
  Samples unlabeled;
  Samples val;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  int steps = 0;
  double loss = 0.0;  // mean total over the epoch's steps
  double supervised = 0.0;
  double unsupervised = 0.0;
  bool validated = false;
  double val_ba = 0.0;
  double val_kappa = 0.0;
  std::string checkpoint;  // set when this epoch became the best model
};

struct History {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_ba = -1.0;
  double best_kappa = -2.0;

  nlohmann::json summary() const;
};

struct StepLog {
  int epoch;
  int step;
  losses::BatchLossReport report;
};

template <typename T>
struct TrainResult {
  nn::Network<T> best;
  History history;
};

struct TrainOptions {
  /// When non-empty: checkpoints/best.ckpt, history.csv, history.json and
  /// train_log.csv are written here.
  std::filesystem::path run_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

template <typename T>
TrainResult<T> train(const TrainConfig& config, const nn::NetworkConfig& net_config, const TrainData& data,
                     const TrainOptions& options = {});

/// Softmax outputs (n, n_classes) in eval mode.
template <typename T>
std::vector<double> predict_proba(const nn::Network<T>& net, const std::vector<PatchPair>& x, int batch_size = 64);

void write_history_csv(const std::filesystem::path& path, const History& history);

}  // namespace semixup::trainer
