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


// Experiment grids and ablations as resumable sets of independent cells.
//
// Each cell lives in <out>/cells/<id>/ and is complete once its result.json
// exists. A cell is claimed through an exclusively created <id>.lock file
// holding the owner's pid; locks of dead processes are reclaimed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "semixup/experiment.hpp"

namespace semixup::grid {

struct Cell {
  std::string variant;  // ablation variant name, empty for grid cells
  losses::Method method = losses::Method::kSemixup;
  int labels_per_grade = 0;
  int unlabeled_multiplier = 0;
  losses::LossWeights weights;
  std::uint64_t seed = 0;

  std::string id() const;
};

/// method x labels_per_grade x multiplier x weights x seeds. Empty grid axes
/// fall back to the single value of the base configuration; the weights axis
/// applies to Semixup only.
std::vector<Cell> grid_cells(const experiment::RunConfig& config);

/// full, no_in_manifold, no_out_of_manifold, no_interpolation and
/// no_regularizers for every seed, on the configured data setting.
std::vector<Cell> ablation_cells(const experiment::RunConfig& config);

experiment::RunConfig cell_config(const experiment::RunConfig& base, const Cell& cell);

enum class CellState { kReused, kComputed, kFailed, kBusy };
const char* to_string(CellState s);

struct CellResult {
  Cell cell;
  CellState state = CellState::kFailed;
  std::string message;
  nlohmann::json result;  // contents of result.json when available
};

struct Summary {
  std::vector<CellResult> cells;  // in input order
  int incomplete() const;
};

/// Runs the cells with `workers` threads. Per-cell errors are recorded, not
/// thrown.
Summary run_cells(const experiment::RunConfig& base, const std::vector<Cell>& cells,
                  const std::filesystem::path& out_dir, int workers = 1, std::ostream* log = nullptr);

/// Long format, one row per cell.
void write_results_csv(const std::filesystem::path& path, const Summary& summary);

/// Mean and standard error of validation BA per ablation variant.
void write_ablation_summary(const std::filesystem::path& path, const Summary& summary);

/// Worker count from SEMIXUP_WORKERS (default 1). Throws InvalidConfig on a
/// malformed value.
int workers_from_env();

}  // namespace semixup::grid
