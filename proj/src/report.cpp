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


#include "semixup/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"
#include "semixup/svg.hpp"

namespace semixup::report {
namespace {

void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "run" : out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// b's predictions reordered to a's sample order, or empty if the sets differ.
std::vector<int> aligned(const Predictions& a, const Predictions& b) {
  if (a.size() != b.size()) return {};
  std::map<std::string, int> by_id;
  const auto pred_b = b.predicted();
  for (std::size_t i = 0; i < b.size(); ++i) by_id[b.ids[i]] = pred_b[i];
  std::vector<int> out;
  for (const auto& id : a.ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) return {};
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

void write_predictions_csv(const std::filesystem::path& path, const Predictions& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  std::vector<std::string> header = {"id", "patient_id", "grade"};
  for (int k = 0; k < p.n_classes; ++k) header.push_back("p" + std::to_string(k));
  write_csv_row(out, header);
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<std::string> row = {p.ids[i], p.patients[i], std::to_string(p.truth[i])};
    for (int k = 0; k < p.n_classes; ++k) row.push_back(format_double(p.probs[i * p.n_classes + k]));
    write_csv_row(out, row);
  }
}

Predictions read_predictions_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto& h = table.header;
  if (h.size() < 5 || h[0] != "id" || h[1] != "patient_id" || h[2] != "grade")
    throw Error(ErrorCode::kParseError, path.string() + ": unexpected predictions header");
  Predictions p;
  p.n_classes = static_cast<int>(h.size()) - 3;
  for (int k = 0; k < p.n_classes; ++k)
    if (h[3 + k] != "p" + std::to_string(k)) throw Error(ErrorCode::kParseError, path.string() + ": bad column " + h[3 + k]);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != h.size())
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(table.line_numbers[r]) + ": wrong cell count");
    p.ids.push_back(row[0]);
    p.patients.push_back(row[1]);
    p.truth.push_back(static_cast<int>(parse_int(row[2])));
    for (int k = 0; k < p.n_classes; ++k) p.probs.push_back(parse_double(row[3 + k]));
  }
  return p;
}

evaluate::EvalReport write_evaluation(const std::filesystem::path& run_dir, const Predictions& p) {
  const auto dir = run_dir / "eval";
  std::filesystem::create_directories(dir);
  const auto r = evaluate::evaluate_predictions(p.truth, p.probs, p.n_classes);
  write_predictions_csv(dir / "predictions.csv", p);
  write_text(dir / "eval.json", evaluate::to_json(r).dump(2) + "\n");
  if (!r.roc.empty()) evaluate::write_curve_csv(dir / "roc.csv", r.roc, "fpr", "tpr");
  if (!r.pr.empty()) evaluate::write_curve_csv(dir / "pr.csv", r.pr, "recall", "precision");
  return r;
}

Run load_run(const std::filesystem::path& run_dir) {
  const auto preds = run_dir / "eval" / "predictions.csv";
  if (!std::filesystem::exists(preds))
    throw Error(ErrorCode::kMissingRun, run_dir.string() + " has no eval/predictions.csv");
  Run run;
  run.dir = run_dir;
  run.name = run_dir.filename().string();
  if (run.name.empty()) run.name = run_dir.parent_path().filename().string();
  run.predictions = read_predictions_csv(preds);
  // Recomputed from the predictions so the report never trusts a stale summary.
  run.eval = evaluate::evaluate_predictions(run.predictions.truth, run.predictions.probs, run.predictions.n_classes);
  return run;
}

std::vector<std::filesystem::path> render(const std::vector<Run>& runs, const std::filesystem::path& out_dir,
                                          int n_chunks) {
  if (runs.empty()) throw Error(ErrorCode::kMissingRun, "no runs to report");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_text(out_dir / name, content);
    files.push_back(out_dir / name);
  };

  std::ostringstream md;
  md << "# Evaluation report\n\n";
  md << "| run | n | BA | kappa | MSE | AUC | AP |\n|---|---|---|---|---|---|---|\n";
  for (const auto& run : runs) {
    const auto& e = run.eval;
    md << "| " << run.name << " | " << e.n << " | " << fixed(e.ba, 4) << " | " << fixed(e.kappa, 4) << " | "
       << fixed(e.mse, 4) << " | " << (e.auc ? fixed(*e.auc, 4) : "n/a") << " | " << (e.ap ? fixed(*e.ap, 4) : "n/a")
       << " |\n";
  }
  md << "\n";

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    const std::string stem = (i < 9 ? "0" : "") + std::to_string(i + 1) + "_" + slug(run.name);
    emit(stem + "_confusion.svg", svg::confusion_heatmap(run.eval.confusion, run.name + ": confusion (%)"));
    md << "## " << run.name << "\n\n![confusion](" << stem << "_confusion.svg)\n";
    if (!run.eval.roc.empty()) {
      emit(stem + "_roc.svg", svg::curve_plot(run.eval.roc, run.name + ": ROC, grade >= 2", "False positive rate",
                                              "True positive rate", true, run.eval.auc));
      emit(stem + "_pr.svg", svg::curve_plot(run.eval.pr, run.name + ": PR, grade >= 2", "Recall", "Precision",
                                             false, run.eval.ap));
      md << "![roc](" << stem << "_roc.svg) ![pr](" << stem << "_pr.svg)\n";
    }
    md << "\n";
  }

  // Chunk-level BA for the bar chart; runs after the first are tested against it.
  const auto& base = runs.front();
  const auto base_pred = base.predictions.predicted();
  std::vector<svg::Bar> bars;
  md << "## Comparison against " << base.name << "\n\n";
  md << "One-sided Wilcoxon signed-rank test over " << n_chunks
     << " patient-disjoint chunks (run BA > baseline BA). Error bars are standard errors over chunks.\n\n";
  md << "| run | mean chunk BA | SE | p-value | note |\n|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    svg::Bar bar{run.name, 0.0, 0.0, ""};
    std::string p_text = "-", note;
    try {
      const auto other = i == 0 ? base_pred : aligned(base.predictions, run.predictions);
      if (other.empty()) {
        note = "different sample sets";
      } else {
        const auto cmp = evaluate::chunked_compare(other, base_pred, base.predictions.truth, base.predictions.patients,
                                                   n_chunks);
        bar.mean = mean(cmp.ba_a);
        bar.se = standard_error(cmp.ba_a);
        if (i > 0) {
          if (cmp.p_value) p_text = fixed(*cmp.p_value, 4);
          bar.marker = svg::stars(cmp.p_value);
          note = cmp.note;
        }
      }
    } catch (const Error& e) {
      note = e.what();
    }
    bars.push_back(bar);
    md << "| " << run.name << " | " << fixed(bar.mean, 4) << " | " << fixed(bar.se, 4) << " | " << p_text << " | "
       << (i == 0 ? "baseline" : note) << " |\n";
  }
  emit("comparison.svg", svg::bar_chart(bars, "Balanced accuracy by run", "Balanced accuracy"));
  md << "\n![comparison](comparison.svg)\n";
  emit("summary.md", md.str());
  return files;
}

}  // namespace semixup::report
