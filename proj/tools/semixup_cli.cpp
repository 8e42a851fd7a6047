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


// semixup: preprocessing, synthetic data, training, evaluation, grids,
// ablations and reports from one declarative config.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 partial failure
// (some records or cells failed), 1 any other error.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "semixup/error.hpp"
#include "semixup/experiment.hpp"
#include "semixup/grid.hpp"
#include "semixup/report.hpp"

namespace fs = std::filesystem;
using namespace semixup;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitPartial = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method;
  std::optional<int> labels_per_grade;
  std::optional<int> unlabeled_mult;
  std::optional<int> epochs;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Seed (replaces the config's seed list)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--method", o.method, "supervised, mixup, pi, ict, mixmatch or semixup");
  cmd->add_option("--labels-per-grade", o.labels_per_grade, "Labeled knees per grade");
  cmd->add_option("--unlabeled-mult", o.unlabeled_mult, "Unlabeled multiplier of the labeled count");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
}

experiment::RunConfig resolve(const Overrides& o) {
  experiment::RunConfig c = o.config.empty() ? experiment::RunConfig{} : experiment::load_run_config(o.config);
  if (o.seed) c.seeds = {*o.seed};
  if (!o.method.empty()) {
    c.train.method = losses::parse_method(o.method);
    if (!c.grid.methods.empty()) c.grid.methods = {c.train.method};
  }
  if (o.labels_per_grade) {
    c.data.setting.labels_per_grade = *o.labels_per_grade;
    if (!c.grid.labels_per_grade.empty()) c.grid.labels_per_grade = {*o.labels_per_grade};
  }
  if (o.unlabeled_mult) {
    c.data.setting.unlabeled_multiplier = *o.unlabeled_mult;
    if (!c.grid.unlabeled_multipliers.empty()) c.grid.unlabeled_multipliers = {*o.unlabeled_mult};
  }
  if (o.epochs) c.train.epochs = *o.epochs;
  c.validate();
  return c;
}

fs::path out_dir(const Overrides& o, const experiment::RunConfig& c) {
  return o.out.empty() ? c.out / c.name : fs::path(o.out);
}

void print_metrics(const std::string& label, const evaluate::EvalReport& r) {
  std::cout << label << ": BA " << r.ba << ", kappa " << r.kappa << ", MSE " << r.mse;
  if (r.auc) std::cout << ", AUC " << *r.auc;
  if (r.ap) std::cout << ", AP " << *r.ap;
  std::cout << " (n=" << r.n << ")\n";
}

int cmd_preprocess(const std::string& manifest, const std::string& landmarks, const std::string& out) {
  const auto summary = experiment::preprocess_dataset(manifest, landmarks, out);
  std::cout << "wrote " << summary.written << " pairs to " << out << "\n";
  for (const auto& [id, reason] : summary.skipped) std::cerr << "skipped " << id << ": " << reason << "\n";
  if (!summary.skipped.empty()) {
    std::cout << summary.skipped.size() << " record(s) skipped, see " << (fs::path(out) / "skipped.csv").string()
              << "\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_synth(const Overrides& o) {
  auto c = resolve(o);
  if (o.seed) c.data.synth_seed = *o.seed;
  const fs::path out = o.out.empty() ? c.out / "synthetic" : fs::path(o.out);
  const int n = experiment::write_synthetic_dataset(c.data, out);
  std::cout << "wrote " << n << " synthetic pairs to " << out.string() << "\n";
  return kExitOk;
}

int cmd_train(const Overrides& o) {
  const auto c = resolve(o);
  const fs::path out = out_dir(o, c);
  const auto seed = c.seeds.front();
  std::cout << "training " << losses::to_string(c.train.method) << " (seed " << seed << ") into " << out.string()
            << "\n";
  const auto outcome = experiment::run_single(c, seed, out);
  std::cout << "best epoch " << outcome.history.best_epoch << "\n";
  if (outcome.val.n > 0) print_metrics("validation", outcome.val);
  if (outcome.test) print_metrics("test", *outcome.test);
  return kExitOk;
}

template <typename T>
report::Predictions eval_checkpoint(const fs::path& ckpt, const trainer::Samples& samples) {
  auto net = nn::load_checkpoint<T>(ckpt, nullptr);
  return experiment::predict(net, samples);
}

int cmd_eval(const std::string& run, const std::string& manifest) {
  const fs::path dir = run;
  const fs::path ckpt = dir / "checkpoints" / "best.ckpt";
  if (!fs::exists(ckpt)) throw Error(ErrorCode::kMissingRun, dir.string() + " has no checkpoints/best.ckpt");
  const auto c = experiment::load_run_config(dir / "config.json");
  trainer::Samples samples;
  if (!manifest.empty()) {
    const fs::path m = manifest;
    samples = trainer::load_samples(dataset::load_manifest(m, true), m.parent_path(), c.data.synth);
  } else {
    auto data = experiment::prepare_data(c.data, c.seeds.front());
    samples = data.test.size() > 0 ? std::move(data.test) : std::move(data.train.val);
  }
  if (samples.size() == 0) throw Error(ErrorCode::kEmptyInput, "nothing to evaluate");
  if (samples.y.size() != samples.size()) throw Error(ErrorCode::kInvalidConfig, "evaluation data needs grades");
  const auto header = nn::read_checkpoint_header(ckpt);
  const auto preds = header.dtype == "f64" ? eval_checkpoint<double>(ckpt, samples) : eval_checkpoint<float>(ckpt, samples);
  const auto r = report::write_evaluation(dir, preds);
  print_metrics("evaluation", r);
  std::cout << "wrote " << (dir / "eval").string() << "\n";
  return kExitOk;
}

int finish_cells(const grid::Summary& summary, const fs::path& out, const std::string& csv_name) {
  grid::write_results_csv(out / csv_name, summary);
  std::cout << "wrote " << (out / csv_name).string() << "\n";
  if (summary.incomplete() > 0) {
    std::cout << summary.incomplete() << " cell(s) incomplete\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_grid(const Overrides& o) {
  const auto c = resolve(o);
  const fs::path out = out_dir(o, c);
  const auto cells = grid::grid_cells(c);
  std::cout << cells.size() << " cell(s) in " << out.string() << "\n";
  const auto summary = grid::run_cells(c, cells, out, grid::workers_from_env(), &std::cout);
  return finish_cells(summary, out, "results.csv");
}

int cmd_ablate(const Overrides& o) {
  const auto c = resolve(o);
  const fs::path out = out_dir(o, c);
  const auto cells = grid::ablation_cells(c);
  std::cout << cells.size() << " cell(s) in " << out.string() << "\n";
  const auto summary = grid::run_cells(c, cells, out, grid::workers_from_env(), &std::cout);
  grid::write_ablation_summary(out / "ablation_summary.csv", summary);
  std::cout << "wrote " << (out / "ablation_summary.csv").string() << "\n";
  return finish_cells(summary, out, "ablation.csv");
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
  std::vector<report::Run> loaded;
  for (const auto& r : runs) loaded.push_back(report::load_run(r));
  const auto files = report::render(loaded, out);
  std::cout << "wrote " << files.size() << " file(s) to " << out << "\n";
  return kExitOk;
}

bool is_validation(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kParseError:
    case ErrorCode::kMissingFile:
    case ErrorCode::kMissingRun:
    case ErrorCode::kOutOfBounds:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kEmptyInput:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised knee osteoarthritis grading"};
  app.require_subcommand(1);

  std::string pre_manifest, pre_landmarks, pre_out;
  auto* pre = app.add_subcommand("preprocess", "Raw radiographs + landmarks to patch-pair blobs");
  pre->add_option("--manifest", pre_manifest, "CSV: id,patient_id,grade,image_path")->required();
  pre->add_option("--landmarks", pre_landmarks, "CSV: image_id,role,x,y")->required();
  pre->add_option("--out", pre_out, "Output directory")->required();

  Overrides synth_o, train_o, grid_o, ablate_o;
  add_common(app.add_subcommand("synth", "Write the synthetic dataset to disk"), synth_o);
  add_common(app.add_subcommand("train", "Train and evaluate one run"), train_o);
  add_common(app.add_subcommand("grid", "Run a resumable method x setting x seed grid"), grid_o);
  add_common(app.add_subcommand("ablate", "Semixup with each regularizer removed in turn"), ablate_o);

  std::string eval_run, eval_manifest;
  auto* ev = app.add_subcommand("eval", "Evaluate a run's best checkpoint");
  ev->add_option("--run", eval_run, "Run directory")->required();
  ev->add_option("--manifest", eval_manifest, "Labeled manifest to evaluate on (default: the run's test set)");

  std::vector<std::string> report_runs;
  std::string report_out = "report";
  auto* rep = app.add_subcommand("report", "Plots and a markdown summary for evaluated runs");
  rep->add_option("runs", report_runs, "Run directories; the first is the comparison baseline")->required();
  rep->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (pre->parsed()) return cmd_preprocess(pre_manifest, pre_landmarks, pre_out);
    if (app.got_subcommand("synth")) return cmd_synth(synth_o);
    if (app.got_subcommand("train")) return cmd_train(train_o);
    if (ev->parsed()) return cmd_eval(eval_run, eval_manifest);
    if (app.got_subcommand("grid")) return cmd_grid(grid_o);
    if (app.got_subcommand("ablate")) return cmd_ablate(ablate_o);
    if (rep->parsed()) return cmd_report(report_runs, report_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.code()) ? kExitInvalid : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
