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


#include "semixup/experiment.hpp"

#include <fstream>
#include <set>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"
#include "semixup/imageprep.hpp"

namespace semixup::experiment {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "' in " + where);
}

json data_to_json(const DataConfig& d) {
  return {{"source", d.source},
          {"manifest", d.manifest.string()},
          {"base_dir", d.base_dir.string()},
          {"test_manifest", d.test_manifest.string()},
          {"synth_per_grade", d.synth_per_grade},
          {"knees_per_patient", d.knees_per_patient},
          {"image_size", d.image_size},
          {"synth_seed", d.synth_seed},
          {"test_per_grade", d.test_per_grade},
          {"noise_sigma", d.synth.noise_sigma},
          {"gap_jitter", d.synth.gap_jitter},
          {"blob_radius", d.synth.blob_radius},
          {"labeled_fraction", d.labeled_fraction},
          {"n_folds", d.n_folds},
          {"split_seed", d.split_seed},
          {"fold", d.setting.fold},
          {"labels_per_grade", d.setting.labels_per_grade},
          {"unlabeled_multiplier", d.setting.unlabeled_multiplier}};
}

DataConfig data_from_json(const json& j) {
  std::set<std::string> keys;
  const json defaults = data_to_json({});
  for (const auto& [k, v] : defaults.items()) keys.insert(k);
  check_keys(j, keys, "data");
  DataConfig d;
  d.source = j.value("source", d.source);
  d.manifest = j.value("manifest", std::string());
  d.base_dir = j.value("base_dir", std::string());
  d.test_manifest = j.value("test_manifest", std::string());
  d.synth_per_grade = j.value("synth_per_grade", d.synth_per_grade);
  d.knees_per_patient = j.value("knees_per_patient", d.knees_per_patient);
  d.image_size = j.value("image_size", d.image_size);
  d.synth_seed = j.value("synth_seed", d.synth_seed);
  d.test_per_grade = j.value("test_per_grade", d.test_per_grade);
  d.synth.noise_sigma = j.value("noise_sigma", d.synth.noise_sigma);
  d.synth.gap_jitter = j.value("gap_jitter", d.synth.gap_jitter);
  d.synth.blob_radius = j.value("blob_radius", d.synth.blob_radius);
  d.labeled_fraction = j.value("labeled_fraction", d.labeled_fraction);
  d.n_folds = j.value("n_folds", d.n_folds);
  d.split_seed = j.value("split_seed", d.split_seed);
  d.setting.fold = j.value("fold", d.setting.fold);
  d.setting.labels_per_grade = j.value("labels_per_grade", d.setting.labels_per_grade);
  d.setting.unlabeled_multiplier = j.value("unlabeled_multiplier", d.setting.unlabeled_multiplier);
  return d;
}

json grid_to_json(const GridConfig& g) {
  json methods = json::array();
  for (auto m : g.methods) methods.push_back(losses::to_string(m));
  json weights = json::array();
  for (const auto& w : g.weights) {
    json wj;
    losses::to_json(wj, w);
    weights.push_back(wj);
  }
  return {{"methods", methods},
          {"labels_per_grade", g.labels_per_grade},
          {"unlabeled_multipliers", g.unlabeled_multipliers},
          {"weights", weights}};
}

GridConfig grid_from_json(const json& j) {
  check_keys(j, {"methods", "labels_per_grade", "unlabeled_multipliers", "weights"}, "grid");
  GridConfig g;
  for (const auto& m : j.value("methods", json::array())) g.methods.push_back(losses::parse_method(m.get<std::string>()));
  g.labels_per_grade = j.value("labels_per_grade", std::vector<int>{});
  g.unlabeled_multipliers = j.value("unlabeled_multipliers", std::vector<int>{});
  for (const auto& wj : j.value("weights", json::array())) {
    losses::LossWeights w;
    losses::from_json(wj, w);
    g.weights.push_back(w);
  }
  return g;
}

// The synthetic test set never shares a generator seed with training data.
std::uint64_t test_population_seed(const DataConfig& d) { return derive_seed(d.synth_seed, 0x54455354); }

const char* to_string(Precision p) { return p == Precision::kFloat ? "float" : "double"; }

Precision parse_precision(const std::string& s) {
  if (s == "float" || s == "f32") return Precision::kFloat;
  if (s == "double" || s == "f64") return Precision::kDouble;
  throw Error(ErrorCode::kInvalidConfig, "unknown precision '" + s + "'");
}

template <typename T>
RunOutcome run_typed(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
                     const std::filesystem::path& run_dir) {
  trainer::TrainConfig tc = config.train;
  tc.seed = seed;
  trainer::TrainOptions options;
  options.run_dir = run_dir;
  if (!run_dir.empty()) {
    std::filesystem::create_directories(run_dir);
    RunConfig single = config;
    single.seeds = {seed};
    std::ofstream(run_dir / "config.json") << to_json(single).dump(2) << "\n";
  }
  auto trained = trainer::train<T>(tc, config.network, data.train, options);

  RunOutcome out;
  out.history = trained.history;
  if (data.train.val.size() > 0) {
    out.val_predictions = predict(trained.best, data.train.val);
    out.val = evaluate::evaluate_predictions(out.val_predictions.truth, out.val_predictions.probs,
                                             out.val_predictions.n_classes);
  }
  if (data.test.size() > 0) {
    out.test_predictions = predict(trained.best, data.test);
    out.test = evaluate::evaluate_predictions(out.test_predictions.truth, out.test_predictions.probs,
                                              out.test_predictions.n_classes);
  }
  if (!run_dir.empty()) {
    if (out.test) {
      report::write_evaluation(run_dir, out.test_predictions);
    } else if (out.val_predictions.size() > 0) {
      report::write_evaluation(run_dir, out.val_predictions);
    }
    json result = {{"seed", seed},
                   {"method", losses::to_string(tc.method)},
                   {"best_epoch", out.history.best_epoch},
                   {"val", evaluate::to_json(out.val)}};
    if (out.test) result["test"] = evaluate::to_json(*out.test);
    // Written last: its presence marks the run as complete.
    std::ofstream(run_dir / "result.json") << result.dump(2) << "\n";
  }
  return out;
}

}  // namespace

nn::NetworkConfig RunConfig::desk_network() {
  nn::NetworkConfig c;
  c.input_size = 32;
  c.widths = {8, 16, 32, 64};
  // The desk nets are too narrow to need it; 0.35 costs both SL and SSL.
  c.dropout_rate = 0.0;
  return c;
}

trainer::TrainConfig RunConfig::desk_training() {
  trainer::TrainConfig c;
  c.epochs = 50;
  c.lr = 3e-3;
  c.batch_size = 16;
  return c;
}

void RunConfig::validate() const {
  if (data.source != "synthetic" && data.source != "manifest")
    throw Error(ErrorCode::kInvalidConfig, "data.source must be 'synthetic' or 'manifest'");
  if (data.source == "manifest" && data.manifest.empty())
    throw Error(ErrorCode::kInvalidConfig, "data.manifest is required for a manifest source");
  if (data.source == "synthetic" && data.image_size != network.input_size)
    throw Error(ErrorCode::kInvalidConfig, "data.image_size must equal network.input_size");
  if (!(data.labeled_fraction > 0.0 && data.labeled_fraction < 1.0))
    throw Error(ErrorCode::kInvalidConfig, "data.labeled_fraction must lie in (0, 1)");
  if (data.n_folds < 2) throw Error(ErrorCode::kInvalidConfig, "data.n_folds must be at least 2");
  if (data.setting.fold < 1 || data.setting.fold > data.n_folds)
    throw Error(ErrorCode::kInvalidConfig, "data.fold must lie in [1, n_folds]");
  if (data.setting.labels_per_grade < 1 || data.setting.unlabeled_multiplier < 0)
    throw Error(ErrorCode::kInvalidConfig, "invalid data setting");
  if (seeds.empty()) throw Error(ErrorCode::kInvalidConfig, "seeds must not be empty");
  network.validate();
  train.validate();
}

json to_json(const RunConfig& c) {
  json net;
  nn::to_json(net, c.network);
  return {{"name", c.name},          {"out", c.out.string()},   {"precision", to_string(c.precision)},
          {"seeds", c.seeds},        {"data", data_to_json(c.data)}, {"network", net},
          {"train", trainer::to_json(c.train)}, {"grid", grid_to_json(c.grid)}};
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"name", "out", "precision", "seeds", "data", "network", "train", "grid"}, "config");
  RunConfig c;
  try {
    c.name = j.value("name", c.name);
    c.out = j.value("out", c.out.string());
    if (j.contains("precision")) c.precision = parse_precision(j["precision"].get<std::string>());
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("data")) c.data = data_from_json(j["data"]);
    if (j.contains("network")) {
      // Keys not given keep the desk defaults.
      json net;
      nn::to_json(net, c.network);
      check_keys(j["network"], [&] {
        std::set<std::string> s;
        for (const auto& [k, v] : net.items()) s.insert(k);
        return s;
      }(), "network");
      net.update(j["network"]);
      nn::from_json(net, c.network);
    }
    if (j.contains("train")) {
      json tr = trainer::to_json(c.train);
      check_keys(j["train"], [&] {
        std::set<std::string> s;
        for (const auto& [k, v] : tr.items()) s.insert(k);
        return s;
      }(), "train");
      tr.update(j["train"]);
      c.train = trainer::train_config_from_json(tr);
    }
    if (j.contains("grid")) c.grid = grid_from_json(j["grid"]);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

PreparedData prepare_data(const DataConfig& data, std::uint64_t seed) {
  std::vector<dataset::Record> records;
  std::vector<dataset::Record> test;
  std::filesystem::path base = data.base_dir;
  if (data.source == "synthetic") {
    records = dataset::synth_population(data.synth_per_grade, data.knees_per_patient, data.image_size,
                                        data.synth_seed, "s");
    if (data.test_per_grade > 0)
      test = dataset::synth_population(data.test_per_grade, 1, data.image_size, test_population_seed(data),
                                       "t");
  } else {
    records = dataset::load_manifest(data.manifest, true);
    if (base.empty()) base = data.manifest.parent_path();
    if (!data.test_manifest.empty()) test = dataset::load_manifest(data.test_manifest, true);
  }
  const auto plan = dataset::stratified_split(records, data.labeled_fraction, data.n_folds, data.split_seed);
  const auto realized = dataset::realize_setting(records, plan, data.setting, seed);
  PreparedData out;
  out.train.labeled = trainer::load_samples(realized.labeled, base, data.synth);
  out.train.unlabeled = trainer::load_samples(realized.unlabeled, base, data.synth);
  out.train.val = trainer::load_samples(realized.val, base, data.synth);
  out.test = trainer::load_samples(test, base, data.synth);
  return out;
}

template <typename T>
report::Predictions predict(const nn::Network<T>& net, const trainer::Samples& samples) {
  report::Predictions p;
  p.n_classes = net.config().n_classes;
  p.ids = samples.ids;
  p.patients = samples.patients;
  p.truth = samples.y;
  p.probs = trainer::predict_proba(net, samples.x);
  return p;
}

RunOutcome run_single(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
                      const std::filesystem::path& run_dir) {
  config.validate();
  return config.precision == Precision::kFloat ? run_typed<float>(config, data, seed, run_dir)
                                               : run_typed<double>(config, data, seed, run_dir);
}

RunOutcome run_single(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& run_dir) {
  return run_single(config, prepare_data(config.data, seed), seed, run_dir);
}

PreprocessSummary preprocess_dataset(const std::filesystem::path& raw_manifest,
                                     const std::filesystem::path& landmarks, const std::filesystem::path& out_dir) {
  const auto table = read_csv(raw_manifest, kRawManifestHeader);
  const auto marks = imageprep::load_landmarks(landmarks);
  const auto base = raw_manifest.parent_path();
  std::filesystem::create_directories(out_dir / "pairs");
  PreprocessSummary summary;
  std::vector<dataset::Record> written;
  for (const auto& row : table.rows) {
    const std::string& id = row[0];
    try {
      if (id.empty()) throw Error(ErrorCode::kParseError, "empty id");
      if (id.find_first_of("/\\") != std::string::npos) throw Error(ErrorCode::kParseError, "id contains a path separator");
      std::optional<int> grade;
      if (!row[2].empty()) {
        const auto g = parse_int(row[2]);
        if (g < 0 || g >= kNumGrades) throw Error(ErrorCode::kOutOfBounds, "grade " + row[2] + " outside 0..4");
        grade = static_cast<int>(g);
      }
      if (const auto bad = marks.problems.find(id); bad != marks.problems.end())
        throw Error(ErrorCode::kParseError, "landmarks: " + bad->second);
      const auto lm = marks.complete.find(id);
      if (lm == marks.complete.end()) throw Error(ErrorCode::kMissingFile, "no landmarks for this image");
      std::filesystem::path image = row[3];
      if (image.is_relative()) image = base / image;
      const auto pair = imageprep::preprocess(imageprep::load_raw_image(image), lm->second);
      const std::string rel = "pairs/" + id + ".bin";
      write_pair_blob(out_dir / rel, pair);
      written.push_back({id, row[1], grade, rel});
      ++summary.written;
    } catch (const Error& e) {
      summary.skipped.emplace_back(id, e.what());
    }
  }
  dataset::save_manifest(out_dir / "manifest.csv", written);
  std::ofstream skipped(out_dir / "skipped.csv");
  write_csv_row(skipped, {"id", "reason"});
  for (const auto& [id, reason] : summary.skipped) write_csv_row(skipped, {id, reason});
  return summary;
}

int write_synthetic_dataset(const DataConfig& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "pairs");
  int count = 0;
  auto materialize = [&](std::vector<dataset::Record> records, const std::string& manifest) {
    for (auto& r : records) {
      const std::string rel = "pairs/" + r.id + ".bin";
      write_pair_blob(out_dir / rel, dataset::load_pair(r, {}, data.synth));
      r.pair_path = rel;
      ++count;
    }
    dataset::save_manifest(out_dir / manifest, records);
  };
  materialize(dataset::synth_population(data.synth_per_grade, data.knees_per_patient, data.image_size, data.synth_seed,
                                        "s"),
              "manifest.csv");
  if (data.test_per_grade > 0)
    materialize(dataset::synth_population(data.test_per_grade, 1, data.image_size,
                                          test_population_seed(data), "t"),
                "test_manifest.csv");
  return count;
}

template report::Predictions predict<float>(const nn::Network<float>&, const trainer::Samples&);
template report::Predictions predict<double>(const nn::Network<double>&, const trainer::Samples&);

}  // namespace semixup::experiment
