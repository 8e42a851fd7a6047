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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `acceptance 1 2 9`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "algorithm1.hpp"
#include "gradcheck.hpp"
#include "metric_oracles.hpp"
#include "semixup/augment.hpp"
#include "semixup/dataset.hpp"
#include "semixup/evaluate.hpp"
#include "semixup/experiment.hpp"
#include "semixup/grid.hpp"
#include "semixup/losses.hpp"
#include "semixup/network.hpp"

using namespace semixup;
using losses::Method;

namespace {

// --- reporting --------------------------------------------------------------

struct Verdict {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// --- shared fixtures ----------------------------------------------------------

nn::NetworkConfig tiny_network() {
  nn::NetworkConfig c;
  c.widths = {2, 3, 3, 4};
  c.input_size = 16;
  return c;
}

struct TinyBatch {
  losses::LabeledBatch labeled;
  std::vector<PatchPair> unlabeled;
};

TinyBatch tiny_batch(std::uint64_t seed, std::size_t nb = 2) {
  Rng r(seed);
  TinyBatch b;
  for (std::size_t i = 0; i < nb; ++i) {
    const int g = static_cast<int>(r.index(kNumGrades));
    b.labeled.x.push_back(dataset::synth_generate(g, r.next_u64(), 16));
    b.labeled.y.push_back(g);
    b.unlabeled.push_back(dataset::synth_generate(static_cast<int>(r.index(kNumGrades)), r.next_u64(), 16));
  }
  return b;
}

const std::vector<Method> kGradientMethods = {Method::kMixup, Method::kPi, Method::kIct, Method::kMixMatch,
                                              Method::kSemixup};

oracle::GradCheck gradient_check(Method m, std::uint64_t seed, double h, double floor) {
  nn::Network<double> net(tiny_network(), 1000 + seed);
  const TinyBatch b = tiny_batch(2000 + seed);
  const losses::LossConfig cfg;
  return oracle::check_gradients(
      net,
      [&](nn::Network<double>& n, const losses::StepContext& ctx) {
        Rng rng(3000 + seed);
        return losses::batch_loss(m, n, b.labeled, b.unlabeled, cfg, rng, ctx).total;
      },
      h, 1e-4, 5, floor);
}

// The desk-scale setting: library defaults, 50 labels per grade, 6N unlabeled.
experiment::RunConfig desk_config() {
  experiment::RunConfig c;
  c.data.setting = {1, 50, 6};
  return c;
}

const std::vector<std::uint64_t> kDeskSeeds = {0, 1, 2, 3, 4};

// Runs shared by criteria 6 and 7, keyed by (variant, seed).
struct DeskRuns {
  std::map<std::pair<std::string, std::uint64_t>, experiment::RunOutcome> runs;
  std::map<std::string, double> cpu;  // seconds per variant
};

DeskRuns& desk_runs() {
  static DeskRuns cache;
  return cache;
}

const experiment::RunOutcome& desk_run(const std::string& variant, std::uint64_t seed) {
  auto& cache = desk_runs();
  const auto key = std::make_pair(variant, seed);
  if (auto it = cache.runs.find(key); it != cache.runs.end()) return it->second;

  experiment::RunConfig c = desk_config();
  const auto full = c.train.loss.weights;
  if (variant == "supervised") {
    c.train.method = Method::kSupervised;
  } else {
    c.train.method = Method::kSemixup;
    if (variant == "no_in_manifold") c.train.loss.weights.w_in = 0.0;
    if (variant == "no_out_of_manifold") c.train.loss.weights.w_out = 0.0;
    if (variant == "no_interpolation") c.train.loss.weights.w_ic = 0.0;
  }
  (void)full;
  const double t0 = cpu_seconds();
  auto outcome = experiment::run_single(c, seed);
  const double dt = cpu_seconds() - t0;
  cache.cpu[variant] += dt;
  std::cout << fmt("    trained %-19s seed %llu: val BA %.4f, test BA %.4f, best epoch %d (%.0f s)\n", variant.c_str(),
                   static_cast<unsigned long long>(seed), outcome.val.ba, outcome.test ? outcome.test->ba : -1.0,
                   outcome.history.best_epoch, dt)
            << std::flush;
  return cache.runs.emplace(key, std::move(outcome)).first->second;
}

// --- criteria -----------------------------------------------------------------

Verdict criterion1() {
  // Literal check: 2-point central differences at h = 1e-4 in 64-bit mode,
  // maximum relative error over every parameter element.
  Verdict v;
  double worst = 0.0;
  std::string worst_where;
  int failing = 0;
  const double t0 = cpu_seconds();
  for (Method m : kGradientMethods) {
    double method_worst = 0.0, smooth_worst = 0.0;
    std::size_t kinked = 0, params = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto g = gradient_check(m, seed, 1e-4, 1e-6);
      const auto fine = gradient_check(m, seed, 1e-6, 1e-4);
      if (g.max_rel >= 1e-4) ++failing;
      if (g.max_rel > worst) {
        worst = g.max_rel;
        worst_where = std::string(losses::to_string(m)) + " seed " + std::to_string(seed) + " " + g.worst;
      }
      method_worst = std::max(method_worst, g.max_rel);
      smooth_worst = std::max(smooth_worst, fine.max_rel_smooth);
      kinked += fine.kinked;
      params += fine.params;
    }
    v.details.push_back(fmt("%-10s h=1e-4: max rel %.2e | h=1e-6 away from kinks: max rel %.2e (%zu of %zu elements "
                            "near a kink)",
                            losses::to_string(m), method_worst, smooth_worst, kinked, params));
  }
  const double elapsed = cpu_seconds() - t0;
  v.pass = failing == 0 && elapsed < 300.0;
  v.summary = fmt("gradient check, 5 objectives x 5 seeds: %d of 25 exceed rel 1e-4 at h=1e-4 (worst %.2e at %s); "
                  "%.0f CPU s",
                  failing, worst, worst_where.c_str(), elapsed);
  return v;
}

Verdict criterion2() {
  Verdict v;
  double worst = 0.0;
  const losses::LossConfig cfg;
  for (std::uint64_t k = 0; k < 20; ++k) {
    nn::Network<double> net(tiny_network(), 500 + k);
    const TinyBatch b = tiny_batch(600 + k, 2 + k % 3);
    const nn::Mode mode = k % 2 ? nn::Mode::kEval : nn::Mode::kTrain;
    Rng rng(700 + k);
    losses::StepContext ctx;
    ctx.mode = mode;
    ctx.grad = false;
    const auto r = losses::semixup_batch_loss(net, b.labeled, b.unlabeled, cfg, rng, ctx);
    const auto o = oracle::algorithm1(net, b.labeled.x, b.labeled.y, b.unlabeled, cfg, 700 + k, mode);
    worst = std::max({worst, std::abs(r.total - o.total), std::abs(r.supervised - o.supervised),
                      std::abs(r.unsupervised - o.unsupervised)});
  }
  v.pass = worst < 1e-10;
  v.summary = fmt("Semixup batch loss vs straight-line transcription, 20 instances: max abs diff %.2e (< 1e-10)", worst);
  return v;
}

bool same_history(const trainer::History& a, const trainer::History& b) {
  if (a.epochs.size() != b.epochs.size() || a.best_epoch != b.best_epoch || a.best_ba != b.best_ba) return false;
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    const auto& x = a.epochs[e];
    const auto& y = b.epochs[e];
    if (x.supervised != y.supervised || x.val_ba != y.val_ba || x.val_kappa != y.val_kappa) return false;
  }
  return true;
}

bool same_outcome(const experiment::RunOutcome& a, const experiment::RunOutcome& b) {
  return same_history(a.history, b.history) && a.val.ba == b.val.ba && a.val.kappa == b.val.kappa &&
         a.test_predictions.probs == b.test_predictions.probs && a.val_predictions.probs == b.val_predictions.probs;
}

Verdict criterion3() {
  Verdict v;
  experiment::RunConfig c = desk_config();
  c.data.setting = {1, 10, 2};
  c.train.epochs = 5;
  const auto data = experiment::prepare_data(c.data, 0);

  auto run = [&](Method m, auto tweak) {
    auto cc = c;
    cc.train.method = m;
    tweak(cc);
    return experiment::run_single(cc, data, 0);
  };
  auto none = [](experiment::RunConfig&) {};
  const auto smx0 = run(Method::kSemixup, [](experiment::RunConfig& cc) { cc.train.loss.weights = {0, 0, 0}; });
  const auto mixup = run(Method::kMixup, none);
  const auto pi0 = run(Method::kPi, [](experiment::RunConfig& cc) { cc.train.loss.pi_weight = 0.0; });
  const auto sup = run(Method::kSupervised, none);
  const bool a = same_outcome(smx0, mixup);
  const bool b = same_outcome(pi0, sup);
  v.details.push_back(fmt("Semixup w=(0,0,0) vs mixup, 5 epochs: %s (test BA %.4f vs %.4f)", a ? "identical" : "DIFFERENT",
                          smx0.test->ba, mixup.test->ba));
  v.details.push_back(fmt("Pi-model w=0 vs supervised CE, 5 epochs: %s (test BA %.4f vs %.4f)",
                          b ? "identical" : "DIFFERENT", pi0.test->ba, sup.test->ba));

  // ICT at epoch 0 on fixed batches.
  const double ramp0 = losses::ict_ramp(0.0, 100.0, 80.0);
  double worst_gap = 0.0;
  bool within = true;
  const losses::LossConfig cfg;
  for (std::uint64_t k = 0; k < 10; ++k) {
    nn::Network<double> net(tiny_network(), 40 + k);
    const TinyBatch tb = tiny_batch(50 + k, 4);
    losses::StepContext ctx;
    ctx.epoch = 0;
    ctx.grad = false;
    Rng r1(60 + k), r2(60 + k);
    const auto ict = losses::batch_loss(Method::kIct, net, tb.labeled, tb.unlabeled, cfg, r1, ctx);
    const auto ce = losses::batch_loss(Method::kSupervised, net, tb.labeled, tb.unlabeled, cfg, r2, ctx);
    const double gap = std::abs(ict.total - ce.total);
    worst_gap = std::max(worst_gap, gap);
    within = within && gap <= ramp0 && ict.supervised == ce.supervised;
  }
  v.details.push_back(fmt("ICT at epoch 0: |L_ICT - L_CE| <= %.3e on 10 batches (bound 100*e^-5 = %.4f)", worst_gap, ramp0));
  v.pass = a && b && within;
  v.summary = fmt("degeneracies: Semixup(w=0)==mixup %s, Pi(w=0)==CE %s, ICT(epoch 0) within ramp bound %s",
                  a ? "yes" : "no", b ? "yes" : "no", within ? "yes" : "no");
  return v;
}

Verdict criterion4() {
  Verdict v;
  Rng rng(4);
  const int k = kNumGrades;
  double ba_err = 0, kappa_err = 0, auc_err = 0, ap_err = 0, wil_err = 0;
  int instances = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 10 + static_cast<int>(rng.index(150));
    std::vector<int> truth(n), pred(n), binary(n);
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.index(k));
      pred[i] = rng.bernoulli(0.5) ? truth[i] : static_cast<int>(rng.index(k));
      binary[i] = i < 2 ? i : static_cast<int>(rng.index(2));
      // Coarse scores so that ties occur.
      score[i] = std::round((binary[i] * 0.3 + rng.uniform()) * 20.0) / 20.0;
    }
    truth[0] = 0;
    truth[1] = 1;
    ba_err = std::max(ba_err, std::abs(evaluate::balanced_accuracy(truth, pred) - oracle::balanced_accuracy(truth, pred)));
    kappa_err = std::max(kappa_err,
                         std::abs(evaluate::quadratic_kappa(truth, pred, k) - oracle::quadratic_kappa(truth, pred, k)));
    auc_err = std::max(auc_err, std::abs(evaluate::roc_auc(binary, score) - oracle::auc_pairs(binary, score)));
    ap_err = std::max(ap_err, std::abs(evaluate::pr_ap(binary, score) - oracle::average_precision(binary, score)));

    // Paired samples with rounded differences: ties and zeros included.
    const int m = 6 + static_cast<int>(rng.index(15));  // up to 20 pairs
    std::vector<double> a(m), b(m);
    for (int i = 0; i < m; ++i) {
      b[i] = rng.uniform();
      a[i] = b[i] + std::round(rng.normal(0.3, 1.0) * 4.0) / 4.0;
    }
    a[0] = b[0] + 1.0;
    a[1] = b[1] - 0.5;
    a[2] = b[2] + 0.75;
    a[3] = b[3] + 0.25;
    a[4] = b[4] - 1.25;
    wil_err = std::max(wil_err, std::abs(evaluate::wilcoxon_one_sided(a, b) - oracle::wilcoxon_enumerated(a, b)));
    ++instances;
  }
  const double tol = 1e-12;
  v.pass = ba_err <= tol && kappa_err <= tol && auc_err <= tol && ap_err <= tol && wil_err <= tol;
  v.summary = fmt("metrics vs brute-force references, %d instances each: max abs diff BA %.1e, kappa %.1e, AUC %.1e, "
                  "AP %.1e, exact Wilcoxon %.1e (tolerance 1e-12)",
                  instances, ba_err, kappa_err, auc_err, ap_err, wil_err);
  return v;
}

Verdict criterion5() {
  Verdict v;
  const nn::NetworkConfig def;
  const nn::Network<double> net(def, 0);
  const std::vector<std::array<int, 3>> table = {
      {32, 128, 128}, {32, 128, 128}, {32, 128, 128}, {64, 64, 64}, {64, 64, 64},
      {128, 32, 32},  {128, 32, 32},  {256, 16, 16},  {256, 16, 16}};
  const bool chain = net.shape_chain() == table;

  Rng rng(5);
  PatchPair pair(128);
  for (auto& x : pair.lateral.data) x = static_cast<float>(rng.uniform(-1, 1));
  for (auto& x : pair.medial.data) x = static_cast<float>(rng.uniform(-1, 1));
  bool pooled = true;
  double worst_sum = 0.0;
  for (nn::Pooling p : {nn::Pooling::kSamHV, nn::Pooling::kSamVH, nn::Pooling::kGap}) {
    nn::NetworkConfig c = def;
    c.pooling = p;
    const nn::Network<double> n(c, 1);
    const auto cache = n.forward(nn::make_batch<double>(std::vector<PatchPair>{pair, pair}), nn::Mode::kEval, nullptr);
    pooled = pooled && cache.features.size() == 2u * 2u * 256u && cache.logits.size() == 10u;
    const auto probs = nn::softmax<double>(cache.logits, 5);
    for (int i = 0; i < 2; ++i)
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(probs.begin() + i * 5, probs.begin() + i * 5 + 5, 0.0) - 1.0));
  }
  // Pooled-vector size per patch from the pooling layer alone.
  std::vector<double> fm(256 * 16 * 16);
  for (auto& x : fm) x = rng.normal();
  std::vector<double> gap(256);
  nn::gap_forward<double>(fm, 256, 16, 16, gap);

  const auto dir = std::filesystem::temp_directory_path() / ("semixup_acceptance_ckpt_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  bool exact = true;
  {
    const nn::Network<float> f(def, 2);
    nn::save_checkpoint(dir / "f.ckpt", f);
    const auto back = nn::load_checkpoint<float>(dir / "f.ckpt");
    for (std::size_t i = 0; i < f.params().tensors.size(); ++i) {
      const auto& a = f.params().tensors[i].value;
      const auto& b = back.params().tensors[i].value;
      exact = exact && a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
    }
    nn::save_checkpoint(dir / "d.ckpt", net);
    const auto dback = nn::load_checkpoint<double>(dir / "d.ckpt");
    for (std::size_t i = 0; i < net.params().tensors.size(); ++i) {
      const auto& a = net.params().tensors[i].value;
      const auto& b = dback.params().tensors[i].value;
      exact = exact && a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
    }
  }
  std::filesystem::remove_all(dir);
  v.pass = chain && pooled && gap.size() == 256 && worst_sum <= 1e-9 && exact;
  v.summary = fmt("architecture: shape chain to 256x16x16 %s, pooled C x 1 x 1 for SAM-HV/SAM-VH/GAP %s, softmax rows "
                  "within %.1e of 1, checkpoint round-trip %s",
                  chain ? "matches" : "DIFFERS", pooled ? "yes" : "no", worst_sum, exact ? "bit-exact" : "NOT exact");
  return v;
}

Verdict criterion6() {
  Verdict v;
  std::vector<double> sl, smx;
  int significant = 0;
  const double cpu0 = desk_runs().cpu["supervised"] + desk_runs().cpu["full"];
  for (auto seed : kDeskSeeds) {
    const auto& a = desk_run("full", seed);
    const auto& b = desk_run("supervised", seed);
    smx.push_back(a.test->ba);
    sl.push_back(b.test->ba);
    const auto cmp = evaluate::chunked_compare(a.test_predictions.predicted(), b.test_predictions.predicted(),
                                               a.test_predictions.truth, a.test_predictions.patients, 20);
    if (cmp.significant()) ++significant;
    v.details.push_back(fmt("seed %llu: Semixup %.4f vs supervised %.4f, 20-chunk one-sided Wilcoxon p = %s",
                            static_cast<unsigned long long>(seed), a.test->ba, b.test->ba,
                            cmp.p_value ? fmt("%.4g", *cmp.p_value).c_str() : ("n/a (" + cmp.note + ")").c_str()));
  }
  const double cpu = desk_runs().cpu["supervised"] + desk_runs().cpu["full"] - cpu0;
  const double cpu_min = cpu / 60.0;
  const bool better = mean(smx) > mean(sl);
  v.pass = better && significant >= 3 && cpu_min < 30.0;
  v.summary = fmt("desk-scale SSL benefit: mean test BA Semixup %.4f vs supervised %.4f, p < 0.05 in %d of 5 seeds, "
                  "%.1f CPU min",
                  mean(smx), mean(sl), significant, cpu_min);
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::map<std::string, std::vector<double>> val;
  for (const char* variant : {"full", "no_in_manifold", "no_out_of_manifold", "no_interpolation"})
    for (auto seed : kDeskSeeds) val[variant].push_back(desk_run(variant, seed).val.ba);
  const double full = mean(val["full"]);
  bool ok = true;
  std::string row;
  for (const char* variant : {"no_in_manifold", "no_out_of_manifold", "no_interpolation"}) {
    const double m = mean(val[variant]);
    ok = ok && full >= m;
    row += fmt(", %s %.4f", variant, m);
  }
  v.pass = ok;
  v.summary = "ablation direction: mean validation BA full " + fmt("%.4f", full) + row;
  return v;
}

Verdict criterion8() {
  Verdict v;
  experiment::RunConfig c = desk_config();
  c.precision = experiment::Precision::kDouble;
  c.train.epochs = 2;
  bool all = true;
  for (auto [name, method] : {std::pair{"supervised", Method::kSupervised}, {"semixup", Method::kSemixup},
                              {"mixmatch", Method::kMixMatch}}) {
    auto cc = c;
    cc.train.method = method;
    const auto a = experiment::run_single(cc, 11);
    const auto b = experiment::run_single(cc, 11);
    const bool same = same_outcome(a, b) && a.test->ba == b.test->ba && a.test->kappa == b.test->kappa &&
                      a.test->auc == b.test->auc && a.history.epochs.back().loss == b.history.epochs.back().loss;
    all = all && same;
    v.details.push_back(fmt("%s, 64-bit, 2 epochs, repeated: %s", name, same ? "identical" : "DIFFERENT"));
  }
  const auto g1 = gradient_check(Method::kSemixup, 0, 1e-4, 1e-6);
  const auto g2 = gradient_check(Method::kSemixup, 0, 1e-4, 1e-6);
  const bool fd = g1.max_rel == g2.max_rel && g1.worst == g2.worst;
  v.details.push_back(fmt("gradient check repeated: %s", fd ? "identical" : "DIFFERENT"));
  v.pass = all && fd;
  v.summary = fmt("determinism: repeated runs with identical seeds %s", v.pass ? "reproduce every number" : "DIVERGE");
  return v;
}

Verdict criterion9() {
  Verdict v;
  Rng rng(9);
  double lowest = 1.0;
  for (int i = 0; i < 100000; ++i) lowest = std::min(lowest, losses::sample_lambda(rng, 0.75, true).lambda);

  const augment::TransformSpec spec;
  const int draws = 10000;
  int noise = 0, rot = 0, pad = 0, crop = 0, gamma = 0;
  for (int i = 0; i < draws; ++i) {
    const auto t = augment::sample_transform(rng, spec);
    noise += t.noise_on;
    rot += t.rotation_on;
    pad += t.padding_on;
    crop += t.crop_on;
    gamma += t.gamma_on;
  }
  const std::vector<std::tuple<const char*, double, double>> freq = {
      {"noise", noise / double(draws), 0.5}, {"rotation", rot / double(draws), 1.0},
      {"padding", pad / double(draws), 1.0}, {"crop", crop / double(draws), 1.0},
      {"gamma", gamma / double(draws), 0.5}};
  bool ok = lowest >= 0.5;
  std::string row;
  for (const auto& [name, got, want] : freq) {
    ok = ok && std::abs(got - want) <= 0.02;
    row += fmt(" %s %.4f/%.2f", name, got, want);
  }
  v.pass = ok;
  v.summary = fmt("min of 1e5 clamped lambdas %.4f (>= 0.5); activation frequency/target over 1e4 draws:", lowest) + row;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= 9; ++i) selected.insert(i);

  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > 9) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    std::cout << "criterion " << id << ": running\n" << std::flush;
    const auto wall0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[id - 1]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("threw: ") + e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    for (const auto& d : v.details) std::cout << "    " << d << "\n";
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << v.summary << fmt(" [%.0f s]", wall)
              << "\n"
              << std::flush;
    failed += !v.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << "(" << selected.size() - failed << "/" << selected.size()
            << " criteria passed)\n";
  return failed ? 1 : 0;
}
