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


#include "semixup/grid.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"

namespace semixup::grid {
namespace {

using nlohmann::json;

std::string weights_tag(const losses::LossWeights& w) {
  return format_double(w.w_in) + "-" + format_double(w.w_out) + "-" + format_double(w.w_ic);
}

bool pid_alive(long pid) { return pid > 0 && (::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM); }

enum class Claim { kAcquired, kBusy };

Claim claim(const std::filesystem::path& lock) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid()) + "\n";
      const auto written = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      if (written != static_cast<ssize_t>(pid.size())) throw Error(ErrorCode::kIoError, "cannot write " + lock.string());
      return Claim::kAcquired;
    }
    if (errno != EEXIST) throw Error(ErrorCode::kIoError, "cannot create " + lock.string());
    long owner = 0;
    std::ifstream(lock) >> owner;
    // A lock held by this process belongs to another worker thread.
    if (owner == ::getpid() || pid_alive(owner)) return Claim::kBusy;
    std::filesystem::remove(lock);
  }
  return Claim::kBusy;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

CellResult run_one(const experiment::RunConfig& base, const Cell& cell, const std::filesystem::path& cells_dir) {
  CellResult r{cell, CellState::kFailed, "", json()};
  const auto dir = cells_dir / cell.id();
  const auto result_path = dir / "result.json";
  if (std::filesystem::exists(result_path)) {
    r.state = CellState::kReused;
    r.result = read_json(result_path);
    return r;
  }
  const auto lock = cells_dir / (cell.id() + ".lock");
  if (claim(lock) == Claim::kBusy) {
    r.state = CellState::kBusy;
    r.message = "locked by another process";
    return r;
  }
  try {
    std::filesystem::remove_all(dir);
    experiment::run_single(cell_config(base, cell), cell.seed, dir);
    r.state = CellState::kComputed;
    r.result = read_json(result_path);
  } catch (const std::exception& e) {
    r.state = CellState::kFailed;
    r.message = e.what();
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "error.txt") << r.message << "\n";
  }
  std::filesystem::remove(lock);
  return r;
}

std::string metric(const json& report, const char* key) {
  if (!report.is_object() || !report.contains(key) || report[key].is_null()) return "";
  return format_double(report[key].get<double>());
}

}  // namespace

std::string Cell::id() const {
  std::string s = variant.empty() ? "" : variant + "_";
  s += std::string(losses::to_string(method)) + "_n" + std::to_string(labels_per_grade) + "_m" +
       std::to_string(unlabeled_multiplier);
  if (method == losses::Method::kSemixup) s += "_w" + weights_tag(weights);
  return s + "_s" + std::to_string(seed);
}

std::vector<Cell> grid_cells(const experiment::RunConfig& config) {
  const auto& g = config.grid;
  const auto methods = g.methods.empty() ? std::vector<losses::Method>{config.train.method} : g.methods;
  const auto labels = g.labels_per_grade.empty() ? std::vector<int>{config.data.setting.labels_per_grade}
                                                 : g.labels_per_grade;
  const auto mults = g.unlabeled_multipliers.empty() ? std::vector<int>{config.data.setting.unlabeled_multiplier}
                                                     : g.unlabeled_multipliers;
  const auto weights = g.weights.empty() ? std::vector<losses::LossWeights>{config.train.loss.weights} : g.weights;
  std::vector<Cell> cells;
  for (auto m : methods)
    for (int n : labels)
      for (int mult : mults)
        for (std::size_t wi = 0; wi < (m == losses::Method::kSemixup ? weights.size() : 1); ++wi)
          for (auto seed : config.seeds) {
            Cell c;
            c.method = m;
            c.labels_per_grade = n;
            c.unlabeled_multiplier = mult;
            c.weights = m == losses::Method::kSemixup ? weights[wi] : config.train.loss.weights;
            c.seed = seed;
            cells.push_back(c);
          }
  return cells;
}

std::vector<Cell> ablation_cells(const experiment::RunConfig& config) {
  const auto full = config.train.loss.weights;
  const std::vector<std::pair<std::string, losses::LossWeights>> variants = {
      {"full", full},
      {"no_in_manifold", {0.0, full.w_out, full.w_ic}},
      {"no_out_of_manifold", {full.w_in, 0.0, full.w_ic}},
      {"no_interpolation", {full.w_in, full.w_out, 0.0}},
      {"no_regularizers", {0.0, 0.0, 0.0}},
  };
  std::vector<Cell> cells;
  for (const auto& [name, w] : variants)
    for (auto seed : config.seeds) {
      Cell c;
      c.variant = name;
      c.method = losses::Method::kSemixup;
      c.labels_per_grade = config.data.setting.labels_per_grade;
      c.unlabeled_multiplier = config.data.setting.unlabeled_multiplier;
      c.weights = w;
      c.seed = seed;
      cells.push_back(c);
    }
  return cells;
}

experiment::RunConfig cell_config(const experiment::RunConfig& base, const Cell& cell) {
  auto c = base;
  c.name = cell.id();
  c.train.method = cell.method;
  c.train.loss.weights = cell.weights;
  c.data.setting.labels_per_grade = cell.labels_per_grade;
  c.data.setting.unlabeled_multiplier = cell.unlabeled_multiplier;
  c.seeds = {cell.seed};
  c.grid = {};
  return c;
}

const char* to_string(CellState s) {
  switch (s) {
    case CellState::kReused: return "reused";
    case CellState::kComputed: return "computed";
    case CellState::kFailed: return "failed";
    case CellState::kBusy: return "busy";
  }
  return "?";
}

int Summary::incomplete() const {
  int n = 0;
  for (const auto& c : cells) n += (c.state == CellState::kFailed || c.state == CellState::kBusy);
  return n;
}

Summary run_cells(const experiment::RunConfig& base, const std::vector<Cell>& cells,
                  const std::filesystem::path& out_dir, int workers, std::ostream* log) {
  base.validate();
  const auto cells_dir = out_dir / "cells";
  std::filesystem::create_directories(cells_dir);
  std::ofstream(out_dir / "config.json") << experiment::to_json(base).dump(2) << "\n";

  Summary summary;
  summary.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      summary.cells[i] = run_one(base, cells[i], cells_dir);
      if (log) {
        std::lock_guard<std::mutex> guard(log_mutex);
        const auto& r = summary.cells[i];
        *log << "[" << (i + 1) << "/" << cells.size() << "] " << r.cell.id() << ": " << to_string(r.state);
        if (!r.message.empty()) *log << " (" << r.message << ")";
        *log << "\n";
      }
    }
  };
  workers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return summary;
}

void write_results_csv(const std::filesystem::path& path, const Summary& summary) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv_row(out, {"cell", "variant", "method", "labels_per_grade", "unlabeled_multiplier", "w_in", "w_out", "w_ic",
                      "seed", "status", "best_epoch", "val_ba", "val_kappa", "test_ba", "test_kappa", "test_mse",
                      "test_auc", "test_ap"});
  for (const auto& r : summary.cells) {
    const auto& c = r.cell;
    const json& res = r.result;
    const bool ok = res.is_object();
    const json val = ok ? res.value("val", json()) : json();
    const json test = ok ? res.value("test", json()) : json();
    write_csv_row(out, {c.id(), c.variant, losses::to_string(c.method), std::to_string(c.labels_per_grade),
                        std::to_string(c.unlabeled_multiplier), format_double(c.weights.w_in),
                        format_double(c.weights.w_out), format_double(c.weights.w_ic), std::to_string(c.seed),
                        r.state == CellState::kFailed ? "failed: " + r.message : to_string(r.state),
                        ok ? std::to_string(res.value("best_epoch", 0)) : "", metric(val, "ba"),
                        metric(val, "kappa"), metric(test, "ba"), metric(test, "kappa"), metric(test, "mse"),
                        metric(test, "auc"), metric(test, "ap")});
  }
}

void write_ablation_summary(const std::filesystem::path& path, const Summary& summary) {
  struct Acc {
    losses::LossWeights w;
    std::vector<double> val;
    std::vector<double> test;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& r : summary.cells) {
    const auto& name = r.cell.variant;
    if (!acc.count(name)) {
      order.push_back(name);
      acc[name].w = r.cell.weights;
    }
    if (!r.result.is_object()) continue;
    acc[name].val.push_back(r.result["val"]["ba"].get<double>());
    if (r.result.contains("test")) acc[name].test.push_back(r.result["test"]["ba"].get<double>());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? NAN : s / static_cast<double>(v.size());
  };
  auto se = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv_row(out, {"variant", "w_in", "w_out", "w_ic", "n_seeds", "mean_val_ba", "se_val_ba", "mean_test_ba"});
  for (const auto& name : order) {
    const auto& a = acc[name];
    write_csv_row(out, {name, format_double(a.w.w_in), format_double(a.w.w_out), format_double(a.w.w_ic),
                        std::to_string(a.val.size()), a.val.empty() ? "" : format_double(mean(a.val)),
                        a.val.empty() ? "" : format_double(se(a.val)), a.test.empty() ? "" : format_double(mean(a.test))});
  }
}

int workers_from_env() {
  const char* v = std::getenv("SEMIXUP_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  long long n = 0;
  try {
    n = parse_int(v);
  } catch (const Error&) {
    throw Error(ErrorCode::kInvalidConfig, std::string("SEMIXUP_WORKERS must be a positive integer, got '") + v + "'");
  }
  if (n < 1 || n > 256) throw Error(ErrorCode::kInvalidConfig, "SEMIXUP_WORKERS must lie in [1, 256]");
  return static_cast<int>(n);
}

}  // namespace semixup::grid
