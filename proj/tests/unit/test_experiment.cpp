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


#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "semixup/experiment.hpp"
#include "semixup/grid.hpp"
#include "semixup/imageprep.hpp"
#include "test_support.hpp"

using namespace semixup;
using namespace semixup::experiment;

namespace {

RunConfig tiny_run() {
  RunConfig c;
  c.data.synth_per_grade = 20;
  c.data.image_size = 16;
  c.data.test_per_grade = 2;
  c.data.setting = {1, 2, 1};
  c.network.input_size = 16;
  c.network.widths = {2, 4, 4, 4};
  c.train.epochs = 1;
  c.train.batch_size = 4;
  c.seeds = {3};
  return c;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("run config JSON") {
  RunConfig c = tiny_run();
  c.grid.methods = {losses::Method::kSupervised, losses::Method::kSemixup};
  c.grid.weights = {{1, 2, 3}};
  c.precision = Precision::kDouble;
  const RunConfig back = run_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));

  auto j = to_json(c);
  j["data"]["colour"] = 1;
  CHECK_ERROR_CODE(run_config_from_json(j), ErrorCode::kInvalidConfig);
  j = to_json(c);
  j["train"]["augmentation"]["cutout"] = 0.5;
  CHECK_ERROR_CODE(run_config_from_json(j), ErrorCode::kInvalidConfig);
  j = to_json(c);
  j["mystery"] = true;
  CHECK_ERROR_CODE(run_config_from_json(j), ErrorCode::kInvalidConfig);
  j = to_json(c);
  j["data"]["image_size"] = 32;
  CHECK_ERROR_CODE(run_config_from_json(j), ErrorCode::kInvalidConfig);

  test::TempDir dir("config");
  write_text(dir / "bad.json", "{ not json");
  CHECK_ERROR_CODE(load_run_config(dir / "bad.json"), ErrorCode::kInvalidConfig);
  CHECK_ERROR_CODE(load_run_config(dir / "none.json"), ErrorCode::kMissingFile);
  CHECK_NOTHROW(RunConfig{}.validate());
}

TEST_CASE("prepared data") {
  const RunConfig c = tiny_run();
  const PreparedData a = prepare_data(c.data, 3);
  CHECK(a.train.labeled.size() == 10);
  CHECK(a.train.unlabeled.size() == 10);
  CHECK(a.train.unlabeled.y.empty());
  CHECK(a.test.size() == 10);
  std::set<std::string> train_ids(a.train.labeled.ids.begin(), a.train.labeled.ids.end());
  for (const auto& id : a.test.ids) CHECK(train_ids.count(id) == 0);
  CHECK(prepare_data(c.data, 3).train.labeled.ids == a.train.labeled.ids);

  // The same data from disk gives the same pairs.
  test::TempDir dir("synthds");
  CHECK(write_synthetic_dataset(c.data, dir.path()) == 110);
  DataConfig disk = c.data;
  disk.source = "manifest";
  disk.manifest = dir / "manifest.csv";
  disk.test_manifest = dir / "test_manifest.csv";
  const PreparedData b = prepare_data(disk, 3);
  CHECK(b.train.labeled.ids == a.train.labeled.ids);
  CHECK(b.train.labeled.x == a.train.labeled.x);
  CHECK(b.test.x == a.test.x);
}

TEST_CASE("single run") {
  test::TempDir dir("single");
  RunConfig c = tiny_run();
  const RunOutcome out = run_single(c, 3, dir / "r");
  CHECK(out.test.has_value());
  CHECK(out.test->n == 10);
  for (const char* f : {"config.json", "result.json", "history.csv", "eval/predictions.csv", "eval/eval.json"})
    CHECK(std::filesystem::exists(dir / "r" / f));
  const auto result = nlohmann::json::parse(std::ifstream(dir / "r" / "result.json"));
  CHECK(result["test"]["ba"].get<double>() == out.test->ba);

  c.precision = Precision::kDouble;
  const RunOutcome d1 = run_single(c, 3);
  const RunOutcome d2 = run_single(c, 3);
  CHECK(d1.test_predictions.probs == d2.test_predictions.probs);
  CHECK(d1.history.epochs[0].loss == d2.history.epochs[0].loss);
}

TEST_CASE("grid and ablation cells") {
  RunConfig c = tiny_run();
  c.seeds = {1, 2};
  c.grid.methods = {losses::Method::kSupervised, losses::Method::kSemixup};
  c.grid.labels_per_grade = {2, 3};
  c.grid.weights = {{2, 2, 4}, {1, 1, 1}};
  const auto cells = grid::grid_cells(c);
  CHECK(cells.size() == (1 + 2) * 2 * 2);
  std::set<std::string> ids;
  for (const auto& cell : cells) ids.insert(cell.id());
  CHECK(ids.size() == cells.size());

  const auto ablation = grid::ablation_cells(c);
  REQUIRE(ablation.size() == 10);
  std::map<std::string, losses::LossWeights> by_variant;
  for (const auto& cell : ablation) by_variant[cell.variant] = cell.weights;
  CHECK(by_variant.size() == 5);
  CHECK(by_variant["no_in_manifold"].w_in == 0.0);
  CHECK(by_variant["no_in_manifold"].w_out == 2.0);
  CHECK(by_variant["no_out_of_manifold"].w_out == 0.0);
  CHECK(by_variant["no_interpolation"].w_ic == 0.0);
  CHECK(by_variant["no_interpolation"].w_in == 2.0);
  CHECK(by_variant["no_regularizers"].all_zero());

  const RunConfig cc = grid::cell_config(c, ablation[2]);
  CHECK(cc.seeds == std::vector<std::uint64_t>{ablation[2].seed});
  CHECK(cc.train.method == losses::Method::kSemixup);
  CHECK(cc.grid.methods.empty());
}

TEST_CASE("grids resume and respect locks") {
  test::TempDir dir("grid");
  RunConfig c = tiny_run();
  c.seeds = {1, 2};
  c.grid.methods = {losses::Method::kSupervised};
  const auto cells = grid::grid_cells(c);
  REQUIRE(cells.size() == 2);

  // A live owner (this process) blocks the first cell; a dead one does not.
  std::filesystem::create_directories(dir / "cells");
  write_text(dir / "cells" / (cells[0].id() + ".lock"), std::to_string(::getpid()) + "\n");
  write_text(dir / "cells" / (cells[1].id() + ".lock"), "999999999\n");
  std::ostringstream log;
  auto s = grid::run_cells(c, cells, dir.path(), 1, &log);
  CHECK(s.cells[0].state == grid::CellState::kBusy);
  CHECK(s.cells[1].state == grid::CellState::kComputed);
  CHECK(s.incomplete() == 1);
  CHECK(log.str().find("busy") != std::string::npos);

  std::filesystem::remove(dir / "cells" / (cells[0].id() + ".lock"));
  s = grid::run_cells(c, cells, dir.path(), 2);
  CHECK(s.cells[0].state == grid::CellState::kComputed);
  CHECK(s.cells[1].state == grid::CellState::kReused);
  CHECK(s.incomplete() == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "cells" / (cells[1].id() + ".lock")));

  grid::write_results_csv(dir / "results.csv", s);
  std::ifstream in(dir / "results.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("ablation summary") {
  test::TempDir dir("ablation");
  RunConfig c = tiny_run();
  c.seeds = {1};
  const auto s = grid::run_cells(c, grid::ablation_cells(c), dir.path());
  CHECK(s.incomplete() == 0);
  grid::write_ablation_summary(dir / "ablation.csv", s);
  std::ifstream in(dir / "ablation.csv");
  std::string header;
  std::getline(in, header);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("worker count from the environment") {
  ::unsetenv("SEMIXUP_WORKERS");
  CHECK(grid::workers_from_env() == 1);
  ::setenv("SEMIXUP_WORKERS", "3", 1);
  CHECK(grid::workers_from_env() == 3);
  ::setenv("SEMIXUP_WORKERS", "many", 1);
  CHECK_ERROR_CODE(grid::workers_from_env(), ErrorCode::kInvalidConfig);
  ::unsetenv("SEMIXUP_WORKERS");
}

TEST_CASE("dataset preprocessing skips bad records") {
  test::TempDir dir("prep");
  imageprep::RawImage img;
  img.spacing_mm = 0.5;
  img.pixels = Image16(400, 400);
  for (int y = 0; y < 400; ++y)
    for (int x = 0; x < 400; ++x) img.pixels.at(x, y) = static_cast<std::uint16_t>(100 * x + 37 * y);
  imageprep::save_raw_image(dir / "a.raw", img);
  imageprep::save_raw_image(dir / "b.raw", img);
  write_text(dir / "raw.csv", "id,patient_id,grade,image_path\na,p1,2,a.raw\nb,p2,,b.raw\nc,p3,1,missing.raw\n");
  write_text(dir / "lm.csv",
             "image_id,role,x,y\n"
             "a,joint_center,200,200\na,plateau_start,150,202\na,plateau_end,250,198\n"
             "b,joint_center,200,200\nb,plateau_start,150,nan?\nb,plateau_end,250,198\n"
             "c,joint_center,200,200\nc,plateau_start,150,202\nc,plateau_end,250,198\n");
  const PreprocessSummary s = preprocess_dataset(dir / "raw.csv", dir / "lm.csv", dir / "out");
  CHECK(s.written == 1);
  REQUIRE(s.skipped.size() == 2);
  CHECK(s.skipped[0].first == "b");
  CHECK(s.skipped[1].first == "c");
  const auto records = dataset::load_manifest(dir / "out" / "manifest.csv", true);
  REQUIRE(records.size() == 1);
  CHECK(records[0].grade == 2);
  CHECK(dataset::load_pair(records[0], dir / "out").size() == 128);
}
