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
#include <iterator>

#include "semixup/report.hpp"
#include "test_support.hpp"

using namespace semixup;
using namespace semixup::report;

namespace {

Predictions fake_predictions(std::uint64_t seed, double skill) {
  Rng rng(seed);
  Predictions p;
  for (int i = 0; i < 200; ++i) {
    const int truth = i % kNumGrades;
    p.ids.push_back("k" + std::to_string(i));
    p.patients.push_back("p" + std::to_string(i / 2));
    p.truth.push_back(truth);
    std::vector<double> row(kNumGrades);
    double sum = 0.0;
    for (int k = 0; k < kNumGrades; ++k) {
      row[k] = rng.uniform() + (k == truth ? skill : 0.0);
      sum += row[k];
    }
    for (double v : row) p.probs.push_back(v / sum);
  }
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("prediction files round-trip") {
  test::TempDir dir("preds");
  const Predictions p = fake_predictions(1, 0.5);
  write_predictions_csv(dir / "p.csv", p);
  const Predictions back = read_predictions_csv(dir / "p.csv");
  CHECK(back.ids == p.ids);
  CHECK(back.patients == p.patients);
  CHECK(back.truth == p.truth);
  CHECK(back.probs == p.probs);
}

TEST_CASE("evaluated runs load back") {
  test::TempDir dir("runs");
  const Predictions p = fake_predictions(2, 0.8);
  const evaluate::EvalReport written = write_evaluation(dir / "a", p);
  const Run run = load_run(dir / "a");
  CHECK(run.eval.ba == written.ba);
  CHECK(run.predictions.probs == p.probs);
  CHECK(std::filesystem::exists(dir / "a" / "eval" / "eval.json"));
  CHECK_ERROR_CODE(load_run(dir / "nothing"), ErrorCode::kMissingRun);
}

TEST_CASE("rendering is byte-for-byte repeatable") {
  test::TempDir dir("render");
  write_evaluation(dir / "base", fake_predictions(3, 0.4));
  write_evaluation(dir / "better", fake_predictions(4, 1.2));
  std::vector<Run> runs = {load_run(dir / "base"), load_run(dir / "better")};
  const auto first = render(runs, dir / "out1");
  const auto second = render(runs, dir / "out2");
  REQUIRE(first.size() == second.size());
  CHECK(first.size() >= 3);
  bool has_svg = false, has_md = false;
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].filename() == second[i].filename());
    CHECK(slurp(first[i]) == slurp(second[i]));
    has_svg |= first[i].extension() == ".svg";
    has_md |= first[i].extension() == ".md";
  }
  CHECK(has_svg);
  CHECK(has_md);
  const std::string md = slurp(dir / "out1" / "summary.md");
  CHECK(md.find("better") != std::string::npos);
}
