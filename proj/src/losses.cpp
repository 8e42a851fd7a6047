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

#include "semixup/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semixup/error.hpp"

namespace semixup::losses {

const char* to_string(Method m) {
  switch (m) {
    case Method::kSupervised: return "supervised";
    case Method::kMixup: return "mixup";
    case Method::kPi: return "pi";
    case Method::kIct: return "ict";
    case Method::kMixMatch: return "mixmatch";
    case Method::kSemixup: return "semixup";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::kSupervised, Method::kMixup, Method::kPi, Method::kIct, Method::kMixMatch, Method::kSemixup})
    if (s == to_string(m)) return m;
  throw Error(ErrorCode::kInvalidConfig, "unknown method '" + s + "'");
}

void to_json(nlohmann::json& j, const LossWeights& w) { j = nlohmann::json::array({w.w_in, w.w_out, w.w_ic}); }

void from_json(const nlohmann::json& j, LossWeights& w) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kInvalidConfig, "weights must be a 3-element array");
  w.w_in = j[0].get<double>();
  w.w_out = j[1].get<double>();
  w.w_ic = j[2].get<double>();
  if (w.w_in < 0.0 || w.w_out < 0.0 || w.w_ic < 0.0)
    throw Error(ErrorCode::kInvalidConfig, "weights must be non-negative");
}

// --- primitives ------------------------------------------------------------

PatchPair mix(const PatchPair& a, const PatchPair& b, double lambda) {
  if (a.size() != b.size() || a.lateral.data.size() != b.lateral.data.size() ||
      a.medial.data.size() != b.medial.data.size())
    throw Error(ErrorCode::kShapeMismatch, "mix operands differ in shape");
  PatchPair out = a;
  const float l = static_cast<float>(lambda);
  const float r = static_cast<float>(1.0 - lambda);
  for (std::size_t i = 0; i < out.lateral.data.size(); ++i)
    out.lateral.data[i] = l * a.lateral.data[i] + r * b.lateral.data[i];
  for (std::size_t i = 0; i < out.medial.data.size(); ++i)
    out.medial.data[i] = l * a.medial.data[i] + r * b.medial.data[i];
  return out;
}

std::vector<double> mix(std::span<const double> a, std::span<const double> b, double lambda) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "mix operands differ in length");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = lambda * a[i] + (1.0 - lambda) * b[i];
  return out;
}

MixDraw sample_lambda(Rng& rng, double alpha, bool clamp) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must be positive");
  MixDraw d;
  d.lambda = rng.beta(alpha, alpha);
  if (clamp) {
    d.lambda = std::max(d.lambda, 1.0 - d.lambda);
    d.clamped = true;
  }
  return d;
}

MixDraw sample_mix(Rng& rng, std::size_t n, double alpha, bool clamp) {
  const std::size_t partner = rng.index(n);
  MixDraw d = sample_lambda(rng, alpha, clamp);
  d.partner = partner;
  return d;
}

namespace {

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> softmax_row(std::span<const double> z) {
  const double lse = log_sum_exp(z);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

}  // namespace

double soft_target_ce(std::span<const double> logits, std::span<const double> target) {
  const double lse = log_sum_exp(logits);
  double l = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c)
    if (target[c] != 0.0) l -= target[c] * (logits[c] - lse);
  return l;
}

double soft_cross_entropy(std::span<const double> logits, int y_i, int y_j, double lambda) {
  const double lse = log_sum_exp(logits);
  return lambda * (lse - logits[y_i]) + (1.0 - lambda) * (lse - logits[y_j]);
}

double consistency_term(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return s;
}

double interpolation_term(std::span<const double> p_i, std::span<const double> p_j, std::span<const double> p_mix,
                          double lambda) {
  const std::vector<double> target = mix(p_i, p_j, lambda);
  return consistency_term(target, p_mix);
}

double oom_terms(std::span<const double> p_mix, std::span<const double> p_t, std::span<const double> p_tprime) {
  return consistency_term(p_mix, p_t) + consistency_term(p_mix, p_tprime);
}

std::vector<double> sharpen(std::span<const double> p, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidConfig, "temperature must be positive");
  std::vector<double> out(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::pow(p[i], 1.0 / temperature);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

double ict_ramp(double epoch, double w_max, double rampup_epochs) {
  const double t = rampup_epochs > 0.0 ? std::min(epoch / rampup_epochs, 1.0) : 1.0;
  const double d = 1.0 - t;
  return w_max * std::exp(-5.0 * d * d);
}

// --- batch objectives ------------------------------------------------------

namespace {

// Rng stream tags.
constexpr std::uint64_t kLabeledStream = 1;
constexpr std::uint64_t kUnlabeledStream = 2;

// One network evaluation over a batch, with room for upstream gradients on
// both the probabilities and the logits.
template <typename T>
struct Pass {
  int n = 0;
  int k = 0;
  nn::ForwardCache<T> cache;
  std::vector<double> logits;
  std::vector<double> prob;
  std::vector<double> dprob;
  std::vector<double> dlogit;

  std::span<const double> z(std::size_t i) const { return {logits.data() + i * k, static_cast<std::size_t>(k)}; }
  std::span<const double> p(std::size_t i) const { return {prob.data() + i * k, static_cast<std::size_t>(k)}; }
  std::span<double> dp(std::size_t i) { return {dprob.data() + i * k, static_cast<std::size_t>(k)}; }
  std::span<double> dz(std::size_t i) { return {dlogit.data() + i * k, static_cast<std::size_t>(k)}; }
};

template <typename T>
void append_signature(const nn::ForwardCache<T>& cache, std::vector<std::int32_t>& sig) {
  for (std::size_t b = 1; b < cache.acts.size(); ++b)
    for (T v : cache.acts[b]) sig.push_back(v > T(0) ? 1 : (v < T(0) ? -1 : 0));
  for (const auto& s : cache.sam) {
    sig.insert(sig.end(), s.arg_first.begin(), s.arg_first.end());
    sig.insert(sig.end(), s.arg_second.begin(), s.arg_second.end());
    for (T v : s.act) sig.push_back(v > T(0) ? 1 : (v < T(0) ? -1 : 0));
  }
}

template <typename T>
Pass<T> run(const nn::Network<T>& net, const std::vector<PatchPair>& pairs, Rng& stream, std::uint64_t tag,
            const StepContext& ctx) {
  Rng drop = stream.fork(tag);
  Pass<T> pass;
  pass.n = static_cast<int>(pairs.size());
  pass.k = net.config().n_classes;
  const nn::Batch<T> batch = nn::make_batch<T>(pairs);
  pass.cache = net.forward(batch, ctx.mode, &drop);
  if (ctx.kink_signature) append_signature(pass.cache, *ctx.kink_signature);
  pass.logits.assign(pass.cache.logits.begin(), pass.cache.logits.end());
  pass.prob.resize(pass.logits.size());
  for (int i = 0; i < pass.n; ++i) {
    const auto p = softmax_row(pass.z(i));
    std::copy(p.begin(), p.end(), pass.prob.begin() + static_cast<std::size_t>(i) * pass.k);
  }
  pass.dprob.assign(pass.logits.size(), 0.0);
  pass.dlogit.assign(pass.logits.size(), 0.0);
  return pass;
}

// Chains d/dprob through the softmax and backpropagates into the network.
template <typename T>
void finish(nn::Network<T>& net, const Pass<T>& pass, const StepContext& ctx) {
  if (!ctx.grad) return;
  std::vector<T> dz(pass.logits.size());
  for (int i = 0; i < pass.n; ++i) {
    const std::size_t o = static_cast<std::size_t>(i) * pass.k;
    double dot = 0.0;
    for (int c = 0; c < pass.k; ++c) dot += pass.prob[o + c] * pass.dprob[o + c];
    for (int c = 0; c < pass.k; ++c)
      dz[o + c] = static_cast<T>(pass.dlogit[o + c] + pass.prob[o + c] * (pass.dprob[o + c] - dot));
  }
  net.backward(pass.cache, dz);
}

// d||a - b||^2 / da scaled by `s`, accumulated into `ga`; the negation into `gb`.
void add_sq_grad(std::span<const double> a, std::span<const double> b, double s, std::span<double> ga,
                 std::span<double> gb) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double g = 2.0 * s * (a[c] - b[c]);
    ga[c] += g;
    gb[c] -= g;
  }
}

void check_labeled(const LabeledBatch& b, int n_classes) {
  if (b.x.empty()) throw Error(ErrorCode::kEmptyInput, "empty labeled batch");
  if (b.x.size() != b.y.size()) throw Error(ErrorCode::kBatchSizeMismatch, "labels do not match images");
  for (int y : b.y)
    if (y < 0 || y >= n_classes) throw Error(ErrorCode::kOutOfBounds, "label " + std::to_string(y) + " out of range");
}

void check_unlabeled(const LabeledBatch& b, std::span<const PatchPair> u) {
  if (u.size() != b.size())
    throw Error(ErrorCode::kBatchSizeMismatch, "labeled batch has " + std::to_string(b.size()) +
                                                   " items, unlabeled batch " + std::to_string(u.size()));
}

double unsup_divisor(const LossConfig& cfg, std::size_t nb, int nc) {
  return cfg.unsupervised_divisor > 0.0 ? cfg.unsupervised_divisor : static_cast<double>(nb) * nc;
}

std::vector<PatchPair> augment_labeled(const std::vector<PatchPair>& x, const LossConfig& cfg, Rng& lab) {
  if (!cfg.augment_labeled) return x;
  std::vector<PatchPair> out;
  out.reserve(x.size());
  for (const auto& pair : x) out.push_back(augment::apply(augment::sample_transform(lab, cfg.augmentation), pair));
  return out;
}

struct Streams {
  Rng labeled;
  Rng unlabeled;
};

Streams split(Rng& rng) {
  Rng lab = rng.fork(kLabeledStream);
  Rng unl = rng.fork(kUnlabeledStream);
  return {lab, unl};
}

// Plain cross-entropy branch; returns the summed loss.
template <typename T>
double ce_branch(nn::Network<T>& net, const LabeledBatch& b, const LossConfig& cfg, Rng& lab, const StepContext& ctx) {
  const auto xs = augment_labeled(b.x, cfg, lab);
  auto pass = run(net, xs, lab, 3, ctx);
  const double nb = static_cast<double>(b.size());
  double total = 0.0;
  for (int i = 0; i < pass.n; ++i) {
    total += soft_cross_entropy(pass.z(i), b.y[i], b.y[i], 1.0);
    auto dz = pass.dz(i);
    const auto p = pass.p(i);
    for (int c = 0; c < pass.k; ++c) dz[c] = (p[c] - (c == b.y[i] ? 1.0 : 0.0)) / nb;
  }
  finish(net, pass, ctx);
  return total;
}

// Mixup soft cross-entropy with an unclamped lambda and a partner from the
// labeled batch.
template <typename T>
double mixup_branch(nn::Network<T>& net, const LabeledBatch& b, const LossConfig& cfg, Rng& lab,
                    const StepContext& ctx) {
  const auto xs = augment_labeled(b.x, cfg, lab);
  std::vector<PatchPair> mixed;
  std::vector<MixDraw> draws;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    MixDraw d = sample_mix(lab, xs.size(), cfg.alpha, false);
    if (cfg.labeled_lambda) d.lambda = *cfg.labeled_lambda;
    mixed.push_back(mix(xs[i], xs[d.partner], d.lambda));
    draws.push_back(d);
  }
  auto pass = run(net, mixed, lab, 3, ctx);
  const double nb = static_cast<double>(b.size());
  double total = 0.0;
  for (int i = 0; i < pass.n; ++i) {
    const int yi = b.y[i];
    const int yj = b.y[draws[i].partner];
    const double l = draws[i].lambda;
    total += soft_cross_entropy(pass.z(i), yi, yj, l);
    auto dz = pass.dz(i);
    const auto p = pass.p(i);
    for (int c = 0; c < pass.k; ++c) {
      const double t = (c == yi ? l : 0.0) + (c == yj ? 1.0 - l : 0.0);
      dz[c] = (p[c] - t) / nb;
    }
  }
  finish(net, pass, ctx);
  return total;
}

template <typename T>
BatchLossReport start_report(const nn::Network<T>& net, const LabeledBatch& b) {
  BatchLossReport r;
  r.nb = static_cast<int>(b.size());
  r.nc = net.config().n_classes;
  return r;
}

}  // namespace

template <typename T>
BatchLossReport supervised_loss(nn::Network<T>& net, const LabeledBatch& labeled, const LossConfig& config, Rng& rng,
                                const StepContext& ctx) {
  check_labeled(labeled, net.config().n_classes);
  auto s = split(rng);
  BatchLossReport r = start_report(net, labeled);
  r.supervised = ce_branch(net, labeled, config, s.labeled, ctx);
  r.total = r.supervised / r.nb;
  return r;
}

template <typename T>
BatchLossReport mixup_loss(nn::Network<T>& net, const LabeledBatch& labeled, const LossConfig& config, Rng& rng,
                           const StepContext& ctx) {
  check_labeled(labeled, net.config().n_classes);
  auto s = split(rng);
  BatchLossReport r = start_report(net, labeled);
  r.supervised = mixup_branch(net, labeled, config, s.labeled, ctx);
  r.total = r.supervised / r.nb;
  return r;
}

template <typename T>
BatchLossReport semixup_batch_loss(nn::Network<T>& net, const LabeledBatch& labeled,
                                   std::span<const PatchPair> unlabeled, const LossConfig& config, Rng& rng,
                                   const StepContext& ctx) {
  check_labeled(labeled, net.config().n_classes);
  check_unlabeled(labeled, unlabeled);
  auto s = split(rng);
  BatchLossReport r = start_report(net, labeled);
  r.supervised = mixup_branch(net, labeled, config, s.labeled, ctx);

  const LossWeights& w = config.weights;
  if (!w.all_zero()) {
    const std::size_t nb = unlabeled.size();
    Rng& unl = s.unlabeled;
    std::vector<MixDraw> draws(nb);
    std::vector<PatchPair> tx, tpx, xmix;
    tx.reserve(nb);
    tpx.reserve(nb);
    xmix.reserve(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      draws[i] = sample_mix(unl, nb, config.alpha, true);
      const auto t = augment::sample_transform(unl, config.augmentation);
      const auto tp = augment::sample_transform(unl, config.augmentation);
      tx.push_back(augment::apply(t, unlabeled[i]));
      tpx.push_back(augment::apply(tp, unlabeled[i]));
      xmix.push_back(mix(tx.back(), unlabeled[draws[i].partner], draws[i].lambda));
    }
    const std::vector<PatchPair> raw(unlabeled.begin(), unlabeled.end());
    auto pt = run(net, tx, unl, 10, ctx);
    auto ptp = run(net, tpx, unl, 11, ctx);
    auto pm = run(net, xmix, unl, 12, ctx);
    auto pj = run(net, raw, unl, 13, ctx);

    const double sc = 1.0 / unsup_divisor(config, nb, r.nc);
    for (std::size_t i = 0; i < nb; ++i) {
      const double l = draws[i].lambda;
      const std::size_t j = draws[i].partner;
      const auto target = mix(pt.p(i), pj.p(j), l);
      const double in = consistency_term(pt.p(i), ptp.p(i));
      const double out = oom_terms(pm.p(i), pt.p(i), ptp.p(i));
      const double ic = consistency_term(pm.p(i), target);
      r.in_manifold += in;
      r.out_manifold += out;
      r.interpolation += ic;
      r.unsupervised += w.w_in * in + w.w_out * out + w.w_ic * ic;

      add_sq_grad(pt.p(i), ptp.p(i), sc * w.w_in, pt.dp(i), ptp.dp(i));
      add_sq_grad(pm.p(i), pt.p(i), sc * w.w_out, pm.dp(i), pt.dp(i));
      add_sq_grad(pm.p(i), ptp.p(i), sc * w.w_out, pm.dp(i), ptp.dp(i));
      // ||p_mix - (l p_T + (1 - l) p_j)||^2
      std::vector<double> dtarget(r.nc, 0.0);
      add_sq_grad(pm.p(i), target, sc * w.w_ic, pm.dp(i), dtarget);
      auto dt = pt.dp(i);
      auto dj = pj.dp(j);
      for (int c = 0; c < r.nc; ++c) {
        dt[c] += l * dtarget[c];
        dj[c] += (1.0 - l) * dtarget[c];
      }
    }
    finish(net, pt, ctx);
    finish(net, ptp, ctx);
    finish(net, pm, ctx);
    finish(net, pj, ctx);
  }
  r.total = r.supervised / r.nb + r.unsupervised / unsup_divisor(config, labeled.size(), r.nc);
  return r;
}

template <typename T>
BatchLossReport pi_model_loss(nn::Network<T>& net, const LabeledBatch& labeled, std::span<const PatchPair> unlabeled,
                              const LossConfig& config, Rng& rng, const StepContext& ctx) {
  check_labeled(labeled, net.config().n_classes);
  check_unlabeled(labeled, unlabeled);
  auto s = split(rng);
  BatchLossReport r = start_report(net, labeled);
  r.supervised = ce_branch(net, labeled, config, s.labeled, ctx);
  r.unsup_weight = config.pi_weight;
  if (config.pi_weight != 0.0) {
    const std::size_t nb = unlabeled.size();
    Rng& unl = s.unlabeled;
    std::vector<PatchPair> tx, tpx;
    for (std::size_t i = 0; i < nb; ++i) {
      const auto t = augment::sample_transform(unl, config.augmentation);
      const auto tp = augment::sample_transform(unl, config.augmentation);
      tx.push_back(augment::apply(t, unlabeled[i]));
      tpx.push_back(augment::apply(tp, unlabeled[i]));
    }
    auto pt = run(net, tx, unl, 10, ctx);
    auto ptp = run(net, tpx, unl, 11, ctx);
    const double sc = config.pi_weight / unsup_divisor(config, nb, r.nc);
    for (std::size_t i = 0; i < nb; ++i) {
      r.in_manifold += consistency_term(pt.p(i), ptp.p(i));
      add_sq_grad(pt.p(i), ptp.p(i), sc, pt.dp(i), ptp.dp(i));
    }
    r.unsupervised = config.pi_weight * r.in_manifold;
    finish(net, pt, ctx);
    finish(net, ptp, ctx);
  }
  r.total = r.supervised / r.nb + r.unsupervised / unsup_divisor(config, labeled.size(), r.nc);
  return r;
}

template <typename T>
BatchLossReport ict_loss(nn::Network<T>& net, const LabeledBatch& labeled, std::span<const PatchPair> unlabeled,
                         const LossConfig& config, Rng& rng, const StepContext& ctx) {
  check_labeled(labeled, net.config().n_classes);
  check_unlabeled(labeled, unlabeled);
  auto s = split(rng);
  BatchLossReport r = start_report(net, labeled);
  r.supervised = ce_branch(net, labeled, config, s.labeled, ctx);
  const double wt = ict_ramp(ctx.epoch, config.ict_max_weight, config.ict_rampup_epochs);
  r.unsup_weight = wt;
  if (wt != 0.0) {
    const std::size_t nb = unlabeled.size();
    Rng& unl = s.unlabeled;
    std::vector<PatchPair> tx;
    for (std::size_t i = 0; i < nb; ++i)
      tx.push_back(augment::apply(augment::sample_transform(unl, config.augmentation), unlabeled[i]));
    std::vector<MixDraw> draws(nb);
    std::vector<PatchPair> xmix;
    for (std::size_t i = 0; i < nb; ++i) {
      draws[i] = sample_mix(unl, nb, config.alpha, true);
      xmix.push_back(mix(tx[i], tx[draws[i].partner], draws[i].lambda));
    }
    auto px = run(net, tx, unl, 10, ctx);
    auto pm = run(net, xmix, unl, 12, ctx);
    const double sc = wt / unsup_divisor(config, nb, r.nc);
    for (std::size_t i = 0; i < nb; ++i) {
      const double l = draws[i].lambda;
      const std::size_t j = draws[i].partner;
      const auto target = mix(px.p(i), px.p(j), l);
      r.interpolation += consistency_term(pm.p(i), target);
      std::vector<double> dtarget(r.nc, 0.0);
      add_sq_grad(pm.p(i), target, sc, pm.dp(i), dtarget);
      auto di = px.dp(i);
      for (int c = 0; c < r.nc; ++c) di[c] += l * dtarget[c];
      auto dj = px.dp(j);
      for (int c = 0; c < r.nc; ++c) dj[c] += (1.0 - l) * dtarget[c];
    }
    r.unsupervised = wt * r.interpolation;
    finish(net, px, ctx);
    finish(net, pm, ctx);
  }
  r.total = r.supervised / r.nb + r.unsupervised / unsup_divisor(config, labeled.size(), r.nc);
  return r;
}

template <typename T>
BatchLossReport mixmatch_loss(nn::Network<T>& net, const LabeledBatch& labeled, std::span<const PatchPair> unlabeled,
                              const LossConfig& config, Rng& rng, const StepContext& ctx) {
  check_labeled(labeled, net.config().n_classes);
  check_unlabeled(labeled, unlabeled);
  auto s = split(rng);
  BatchLossReport r = start_report(net, labeled);
  const std::size_t nb = labeled.size();
  const int k = r.nc;
  const auto xs = augment_labeled(labeled.x, config, s.labeled);

  Rng& unl = s.unlabeled;
  std::vector<PatchPair> u1, u2;
  for (std::size_t i = 0; i < nb; ++i) {
    const auto t1 = augment::sample_transform(unl, config.augmentation);
    const auto t2 = augment::sample_transform(unl, config.augmentation);
    u1.push_back(augment::apply(t1, unlabeled[i]));
    u2.push_back(augment::apply(t2, unlabeled[i]));
  }
  auto p1 = run(net, u1, unl, 10, ctx);
  auto p2 = run(net, u2, unl, 11, ctx);

  // Guessed labels: sharpened mean prediction over the two views.
  std::vector<std::vector<double>> mean(nb), guess(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    mean[i].resize(k);
    for (int c = 0; c < k; ++c) mean[i][c] = 0.5 * (p1.p(i)[c] + p2.p(i)[c]);
    guess[i] = sharpen(mean[i], config.mixmatch_temperature);
  }

  // Combined batch W = labeled, view 1, view 2; item a < nb is labeled.
  const std::size_t nw = 3 * nb;
  auto image = [&](std::size_t a) -> const PatchPair& {
    return a < nb ? xs[a] : (a < 2 * nb ? u1[a - nb] : u2[a - 2 * nb]);
  };
  auto target = [&](std::size_t a) {
    std::vector<double> t(k, 0.0);
    if (a < nb) {
      t[labeled.y[a]] = 1.0;
    } else {
      t = guess[(a - nb) % nb];
    }
    return t;
  };
  std::vector<std::size_t> perm(nw);
  std::iota(perm.begin(), perm.end(), 0);
  unl.shuffle(perm.begin(), perm.end());
  std::vector<MixDraw> draws(nw);
  std::vector<PatchPair> mixed_x, mixed_u;
  std::vector<std::vector<double>> mixed_t(nw);
  for (std::size_t a = 0; a < nw; ++a) {
    draws[a] = sample_lambda(unl, config.alpha, true);
    draws[a].partner = perm[a];
    const double l = draws[a].lambda;
    PatchPair m = mix(image(a), image(perm[a]), l);
    mixed_t[a] = mix(target(a), target(perm[a]), l);
    (a < nb ? mixed_x : mixed_u).push_back(std::move(m));
  }
  auto px = run(net, mixed_x, unl, 12, ctx);
  auto pu = run(net, mixed_u, unl, 13, ctx);

  const double wmm = config.mixmatch_weight;
  const double div = unsup_divisor(config, nb, k);
  std::vector<std::vector<double>> dmixed_t(nw, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < nb; ++a) {
    r.supervised += soft_target_ce(px.z(a), mixed_t[a]);
    const double lse = log_sum_exp(px.z(a));
    auto dz = px.dz(a);
    for (int c = 0; c < k; ++c) {
      dz[c] = (px.p(a)[c] - mixed_t[a][c]) / static_cast<double>(nb);
      dmixed_t[a][c] = -(px.z(a)[c] - lse) / static_cast<double>(nb);
    }
  }
  for (std::size_t a = nb; a < nw; ++a) {
    const std::size_t row = a - nb;
    r.out_manifold += consistency_term(pu.p(row), mixed_t[a]);
    add_sq_grad(pu.p(row), mixed_t[a], wmm / div, pu.dp(row), dmixed_t[a]);
  }
  r.unsupervised = wmm * r.out_manifold;
  r.unsup_weight = wmm;

  // Back through the mixed targets to the guesses, the sharpening and the
  // two views.
  std::vector<std::vector<double>> dguess(nb, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < nw; ++a) {
    const double l = draws[a].lambda;
    for (const auto& [item, coef] : {std::pair{a, l}, std::pair{perm[a], 1.0 - l}}) {
      if (item < nb) continue;
      auto& dg = dguess[(item - nb) % nb];
      for (int c = 0; c < k; ++c) dg[c] += coef * dmixed_t[a][c];
    }
  }
  const double inv_t = 1.0 / config.mixmatch_temperature;
  for (std::size_t i = 0; i < nb; ++i) {
    double dot = 0.0;
    for (int c = 0; c < k; ++c) dot += guess[i][c] * dguess[i][c];
    auto d1 = p1.dp(i);
    auto d2 = p2.dp(i);
    for (int c = 0; c < k; ++c) {
      const double dm = inv_t * guess[i][c] * (dguess[i][c] - dot) / mean[i][c];
      d1[c] += 0.5 * dm;
      d2[c] += 0.5 * dm;
    }
  }
  finish(net, px, ctx);
  finish(net, pu, ctx);
  finish(net, p1, ctx);
  finish(net, p2, ctx);
  r.total = r.supervised / r.nb + r.unsupervised / div;
  return r;
}

template <typename T>
BatchLossReport batch_loss(Method method, nn::Network<T>& net, const LabeledBatch& labeled,
                           std::span<const PatchPair> unlabeled, const LossConfig& config, Rng& rng,
                           const StepContext& ctx) {
  switch (method) {
    case Method::kSupervised: return supervised_loss(net, labeled, config, rng, ctx);
    case Method::kMixup: return mixup_loss(net, labeled, config, rng, ctx);
    case Method::kPi: return pi_model_loss(net, labeled, unlabeled, config, rng, ctx);
    case Method::kIct: return ict_loss(net, labeled, unlabeled, config, rng, ctx);
    case Method::kMixMatch: return mixmatch_loss(net, labeled, unlabeled, config, rng, ctx);
    case Method::kSemixup: return semixup_batch_loss(net, labeled, unlabeled, config, rng, ctx);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown method");
}

#define SEMIXUP_INSTANTIATE_LOSSES(T)                                                                                \
  template BatchLossReport batch_loss<T>(Method, nn::Network<T>&, const LabeledBatch&, std::span<const PatchPair>,    \
                                         const LossConfig&, Rng&, const StepContext&);                              \
  template BatchLossReport supervised_loss<T>(nn::Network<T>&, const LabeledBatch&, const LossConfig&, Rng&,          \
                                              const StepContext&);                                                    \
  template BatchLossReport mixup_loss<T>(nn::Network<T>&, const LabeledBatch&, const LossConfig&, Rng&,               \
                                         const StepContext&);                                                         \
  template BatchLossReport semixup_batch_loss<T>(nn::Network<T>&, const LabeledBatch&, std::span<const PatchPair>,    \
                                                 const LossConfig&, Rng&, const StepContext&);                        \
  template BatchLossReport pi_model_loss<T>(nn::Network<T>&, const LabeledBatch&, std::span<const PatchPair>,         \
                                            const LossConfig&, Rng&, const StepContext&);                             \
  template BatchLossReport ict_loss<T>(nn::Network<T>&, const LabeledBatch&, std::span<const PatchPair>,              \
                                       const LossConfig&, Rng&, const StepContext&);                                  \
  template BatchLossReport mixmatch_loss<T>(nn::Network<T>&, const LabeledBatch&, std::span<const PatchPair>,         \
                                            const LossConfig&, Rng&, const StepContext&);

SEMIXUP_INSTANTIATE_LOSSES(float)
SEMIXUP_INSTANTIATE_LOSSES(double)

}  // namespace semixup::losses
