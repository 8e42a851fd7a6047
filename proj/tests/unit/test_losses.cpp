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

#include <cmath>
#include <numeric>

#include "algorithm1.hpp"
#include "gradcheck.hpp"
#include "semixup/dataset.hpp"
#include "semixup/losses.hpp"
#include "test_support.hpp"

using namespace semixup;
using namespace semixup::losses;

namespace {

nn::NetworkConfig tiny_config(nn::Pooling pooling = nn::Pooling::kSamHV) {
  nn::NetworkConfig c;
  c.widths = {2, 3, 3, 4};
  c.input_size = 16;
  c.pooling = pooling;
  return c;
}

struct Batches {
  LabeledBatch labeled;
  std::vector<PatchPair> unlabeled;
};

Batches make_batches(std::uint64_t seed, std::size_t nb = 2, int size = 16) {
  Rng r(seed);
  Batches b;
  for (std::size_t i = 0; i < nb; ++i) {
    const int g = static_cast<int>(r.index(kNumGrades));
    b.labeled.x.push_back(dataset::synth_generate(g, r.next_u64(), size));
    b.labeled.y.push_back(g);
    b.unlabeled.push_back(dataset::synth_generate(static_cast<int>(r.index(kNumGrades)), r.next_u64(), size));
  }
  return b;
}

std::vector<double> probs(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

template <typename T>
std::vector<std::vector<T>> grads(const nn::Network<T>& net) {
  std::vector<std::vector<T>> out;
  for (const auto& t : net.params().tensors) out.push_back(t.grad);
  return out;
}

}  // namespace

TEST_CASE("mix") {
  Rng rng(1);
  const auto a = test::random_pair(8, rng);
  const auto b = test::random_pair(8, rng);
  CHECK(mix(a, b, 1.0) == a);
  CHECK(mix(a, b, 0.0) == b);
  CHECK(mix(a, a, 0.37) == a);
  CHECK_ERROR_CODE(mix(a, test::random_pair(4, rng), 0.5), ErrorCode::kShapeMismatch);
  const std::vector<double> u{1, 0}, v{0, 1};
  CHECK(mix(u, v, 0.25) == std::vector<double>{0.25, 0.75});
}

TEST_CASE("lambda draws") {
  Rng rng(2);
  double lo = 1.0;
  for (int i = 0; i < 100000; ++i) {
    const auto d = sample_lambda(rng, 0.75, true);
    CHECK(d.clamped);
    lo = std::min(lo, d.lambda);
  }
  CHECK(lo >= 0.5);

  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += sample_lambda(rng, 0.75, false).lambda;
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);

  Rng a(5), b(5);
  CHECK(sample_mix(a, 7, 0.75, false).lambda == sample_mix(b, 7, 0.75, false).lambda);
  CHECK_ERROR_CODE(sample_lambda(rng, 0.0, false), ErrorCode::kInvalidConfig);
}

TEST_CASE("soft cross-entropy") {
  const std::vector<double> z{0.3, -1.2, 2.0, 0.1, 0.5};
  double lse = 0.0;
  for (double v : z) lse += std::exp(v);
  lse = std::log(lse);
  CHECK(soft_cross_entropy(z, 2, 4, 1.0) == doctest::Approx(lse - z[2]));
  CHECK(soft_cross_entropy(z, 2, 4, 0.3) == doctest::Approx(0.3 * (lse - z[2]) + 0.7 * (lse - z[4])));
  const std::vector<double> flat(5, 0.7);
  CHECK(soft_cross_entropy(flat, 1, 3, 0.42) == doctest::Approx(std::log(5.0)));
  CHECK(soft_cross_entropy(z, 3, 3, 0.2) == doctest::Approx(soft_cross_entropy(z, 3, 3, 0.9)));
}

TEST_CASE("consistency and interpolation terms") {
  const std::vector<double> e0{1, 0, 0, 0, 0}, e1{0, 1, 0, 0, 0}, uni(5, 0.2);
  CHECK(consistency_term(e0, e0) == 0.0);
  CHECK(consistency_term(e0, e1) == 2.0);
  CHECK(interpolation_term(e0, e1, uni, 0.5) == doctest::Approx(0.30));
  CHECK(interpolation_term(uni, uni, uni, 0.8) == doctest::Approx(0.0));

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(5), q(5), m(5);
    for (int c = 0; c < 5; ++c) {
      p[c] = rng.uniform();
      q[c] = rng.uniform();
      m[c] = rng.uniform();
    }
    p = probs(p);
    q = probs(q);
    m = probs(m);
    CHECK(consistency_term(p, q) == consistency_term(q, p));
    CHECK(consistency_term(p, q) > 0.0);
    CHECK(consistency_term(p, p) == 0.0);
    CHECK(interpolation_term(p, q, m, 1.0) == doctest::Approx(consistency_term(p, m)));
    CHECK(oom_terms(m, p, p) == doctest::Approx(2.0 * consistency_term(m, p)));
    double expect = 0.0;
    for (int c = 0; c < 5; ++c) expect += (m[c] - p[c]) * (m[c] - p[c]) + (m[c] - q[c]) * (m[c] - q[c]);
    CHECK(oom_terms(m, p, q) == doctest::Approx(expect).epsilon(1e-14));
  }
  CHECK(oom_terms(uni, uni, uni) == 0.0);
}

TEST_CASE("sharpen") {
  const std::vector<double> p{0.6, 0.4, 0, 0, 0};
  const auto s = sharpen(p, 0.5);
  CHECK(s[0] == doctest::Approx(0.36 / 0.52));
  CHECK(s[1] == doctest::Approx(0.16 / 0.52));
  CHECK(s[2] == 0.0);
  const std::vector<double> even{0.5, 0.5, 0, 0, 0};
  CHECK(sharpen(even, 0.5) == even);
  const auto q = probs({1, 2, 3, 4, 5});
  const auto same = sharpen(q, 1.0);
  for (int c = 0; c < 5; ++c) CHECK(same[c] == doctest::Approx(q[c]));
}

TEST_CASE("ICT ramp") {
  CHECK(ict_ramp(80, 100, 80) == 100.0);
  CHECK(ict_ramp(300, 100, 80) == 100.0);
  CHECK(ict_ramp(0, 100, 80) == doctest::Approx(100.0 * std::exp(-5.0)));
  CHECK(ict_ramp(0, 100, 80) == doctest::Approx(0.6738).epsilon(1e-4));
  CHECK(ict_ramp(40, 100, 80) < ict_ramp(41, 100, 80));
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::kSupervised, Method::kMixup, Method::kPi, Method::kIct, Method::kMixMatch,
                   Method::kSemixup})
    CHECK(parse_method(to_string(m)) == m);
  CHECK_ERROR_CODE(parse_method("meanteacher"), ErrorCode::kInvalidConfig);
}

TEST_CASE("Semixup batch loss against the transcription") {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    nn::Network<double> net(tiny_config(), 100 + seed);
    const auto b = make_batches(seed);
    for (nn::Mode mode : {nn::Mode::kTrain, nn::Mode::kEval}) {
      Rng rng(seed * 31 + 7);
      StepContext ctx;
      ctx.mode = mode;
      ctx.grad = false;
      const auto r = semixup_batch_loss(net, b.labeled, b.unlabeled, cfg, rng, ctx);
      const auto o = oracle::algorithm1(net, b.labeled.x, b.labeled.y, b.unlabeled, cfg, seed * 31 + 7, mode);
      CHECK(std::abs(r.total - o.total) < 1e-10);
      CHECK(std::abs(r.supervised - o.supervised) < 1e-10);
      CHECK(std::abs(r.unsupervised - o.unsupervised) < 1e-10);
      CHECK(r.total == doctest::Approx(r.supervised / r.nb + r.unsupervised / (r.nb * r.nc)).epsilon(1e-14));
      CHECK(r.in_manifold >= 0.0);
      CHECK(r.out_manifold >= 0.0);
      CHECK(r.interpolation >= 0.0);
    }
  }
}

TEST_CASE("batch size mismatch") {
  nn::Network<double> net(tiny_config(), 1);
  auto b = make_batches(1, 3);
  b.unlabeled.pop_back();
  Rng rng(1);
  for (Method m : {Method::kPi, Method::kIct, Method::kMixMatch, Method::kSemixup})
    CHECK_ERROR_CODE(batch_loss(m, net, b.labeled, b.unlabeled, LossConfig{}, rng), ErrorCode::kBatchSizeMismatch);
}

TEST_CASE("Semixup degenerates to supervised cross-entropy") {
  nn::Network<double> net(tiny_config(), 3);
  const auto b = make_batches(3, 3);
  LossConfig cfg;
  cfg.weights = {0, 0, 0};
  cfg.labeled_lambda = 1.0;
  cfg.augment_labeled = false;
  StepContext ctx;
  ctx.mode = nn::Mode::kEval;
  Rng rng(4);
  const auto r = semixup_batch_loss(net, b.labeled, b.unlabeled, cfg, rng, ctx);

  const auto cache = net.forward(nn::make_batch<double>(b.labeled.x), nn::Mode::kEval, nullptr);
  double ce = 0.0;
  for (std::size_t i = 0; i < b.labeled.size(); ++i)
    ce += soft_cross_entropy(std::span<const double>(cache.logits).subspan(i * 5, 5), b.labeled.y[i],
                             b.labeled.y[i], 1.0);
  CHECK(r.total == doctest::Approx(ce / 3.0).epsilon(1e-13));
  CHECK(r.unsupervised == 0.0);
}

TEST_CASE("Semixup unsupervised terms vanish when nothing varies") {
  nn::Network<double> net(tiny_config(), 5);
  auto b = make_batches(5, 2);
  b.unlabeled[1] = b.unlabeled[0];
  LossConfig cfg;
  cfg.augmentation = augment::TransformSpec::identity();
  StepContext ctx;
  ctx.mode = nn::Mode::kEval;
  ctx.grad = false;
  Rng rng(6);
  const auto r = semixup_batch_loss(net, b.labeled, b.unlabeled, cfg, rng, ctx);
  CHECK(r.in_manifold == 0.0);
  // Mixing identical float images leaves only rounding.
  CHECK(r.out_manifold < 1e-12);
  CHECK(r.interpolation < 1e-12);
}

TEST_CASE("zero unsupervised weight gives the supervised gradients bit for bit") {
  const auto b = make_batches(8, 3);
  StepContext ctx;
  auto run = [&](Method m, const LossConfig& cfg) {
    nn::Network<float> net(tiny_config(), 9);
    Rng rng(10);
    net.params().zero_grad();
    const auto r = batch_loss(m, net, b.labeled, b.unlabeled, cfg, rng, ctx);
    return std::make_pair(r.total, grads(net));
  };
  LossConfig zero;
  zero.weights = {0, 0, 0};
  zero.pi_weight = 0.0;
  zero.ict_max_weight = 0.0;
  const LossConfig def;
  CHECK(run(Method::kSemixup, zero) == run(Method::kMixup, def));
  CHECK(run(Method::kPi, zero) == run(Method::kSupervised, def));
  CHECK(run(Method::kIct, zero) == run(Method::kSupervised, def));
  CHECK(run(Method::kSemixup, def) != run(Method::kMixup, def));
}

TEST_CASE("ICT at epoch 0 stays within the ramp bound of cross-entropy") {
  nn::Network<double> net(tiny_config(), 12);
  const auto b = make_batches(12, 4);
  const LossConfig cfg;
  StepContext ctx;
  ctx.epoch = 0;
  ctx.grad = false;
  Rng r1(13), r2(13);
  const auto ict = ict_loss(net, b.labeled, b.unlabeled, cfg, r1, ctx);
  const auto sup = supervised_loss(net, b.labeled, cfg, r2, ctx);
  CHECK(ict.supervised == sup.supervised);
  CHECK(ict.unsup_weight == doctest::Approx(100.0 * std::exp(-5.0)));
  // Each interpolation term is at most 2.
  const double bound = ict.unsup_weight * 2.0 * ict.nb / (ict.nb * ict.nc);
  CHECK(std::abs(ict.total - sup.total) <= bound);
  CHECK(ict.total >= sup.total);
}

TEST_CASE("Pi-model against a transcription") {
  nn::Network<double> net(tiny_config(), 14);
  const auto b = make_batches(14, 3);
  LossConfig cfg;
  cfg.pi_weight = 1.7;
  StepContext ctx;
  ctx.grad = false;
  Rng rng(15);
  const auto r = pi_model_loss(net, b.labeled, b.unlabeled, cfg, rng, ctx);

  Rng step(15);
  Rng lab = step.fork(1);
  Rng unl = step.fork(2);
  std::vector<PatchPair> xl;
  for (const auto& x : b.labeled.x) xl.push_back(augment::apply(augment::sample_transform(lab, cfg.augmentation), x));
  std::vector<std::vector<double>> logp;
  oracle::probabilities(net, xl, nn::Mode::kTrain, lab, 3, &logp);
  double ce = 0.0;
  for (std::size_t i = 0; i < 3; ++i) ce -= logp[i][b.labeled.y[i]];
  std::vector<PatchPair> t1, t2;
  for (const auto& u : b.unlabeled) {
    const auto a = augment::sample_transform(unl, cfg.augmentation);
    const auto c = augment::sample_transform(unl, cfg.augmentation);
    t1.push_back(augment::apply(a, u));
    t2.push_back(augment::apply(c, u));
  }
  const auto p1 = oracle::probabilities(net, t1, nn::Mode::kTrain, unl, 10);
  const auto p2 = oracle::probabilities(net, t2, nn::Mode::kTrain, unl, 11);
  double cons = 0.0;
  for (std::size_t i = 0; i < 3; ++i) cons += oracle::squared_distance(p1[i], p2[i]);
  CHECK(std::abs(r.total - (ce / 3.0 + 1.7 * cons / 15.0)) < 1e-10);
}

TEST_CASE("MixMatch-lite against a transcription") {
  nn::Network<double> net(tiny_config(), 16);
  const auto b = make_batches(16, 2);
  const LossConfig cfg;
  StepContext ctx;
  ctx.grad = false;
  Rng rng(17);
  const auto r = mixmatch_loss(net, b.labeled, b.unlabeled, cfg, rng, ctx);

  const std::size_t nb = 2;
  Rng step(17);
  Rng lab = step.fork(1);
  Rng unl = step.fork(2);
  std::vector<PatchPair> w;  // labeled, view 1, view 2
  for (const auto& x : b.labeled.x) w.push_back(augment::apply(augment::sample_transform(lab, cfg.augmentation), x));
  std::vector<PatchPair> v1, v2;
  for (const auto& u : b.unlabeled) {
    const auto a = augment::sample_transform(unl, cfg.augmentation);
    const auto c = augment::sample_transform(unl, cfg.augmentation);
    v1.push_back(augment::apply(a, u));
    v2.push_back(augment::apply(c, u));
  }
  const auto q1 = oracle::probabilities(net, v1, nn::Mode::kTrain, unl, 10);
  const auto q2 = oracle::probabilities(net, v2, nn::Mode::kTrain, unl, 11);
  std::vector<std::vector<double>> targets;
  for (std::size_t i = 0; i < nb; ++i) {
    std::vector<double> t(5, 0.0);
    t[b.labeled.y[i]] = 1.0;
    targets.push_back(t);
  }
  std::vector<std::vector<double>> guesses;
  for (std::size_t i = 0; i < nb; ++i) {
    std::vector<double> g(5);
    double s = 0.0;
    for (int c = 0; c < 5; ++c) s += (g[c] = std::pow(0.5 * (q1[i][c] + q2[i][c]), 2.0));
    for (auto& v : g) v /= s;
    guesses.push_back(g);
  }
  for (int view = 0; view < 2; ++view)
    for (std::size_t i = 0; i < nb; ++i) {
      w.push_back(view == 0 ? v1[i] : v2[i]);
      targets.push_back(guesses[i]);
    }
  std::vector<std::size_t> perm(3 * nb);
  std::iota(perm.begin(), perm.end(), 0);
  unl.shuffle(perm.begin(), perm.end());
  std::vector<PatchPair> mx, mu;
  std::vector<std::vector<double>> mt;
  for (std::size_t a = 0; a < 3 * nb; ++a) {
    double l = unl.beta(cfg.alpha, cfg.alpha);
    l = std::max(l, 1.0 - l);
    (a < nb ? mx : mu).push_back(oracle::mix_images(w[a], w[perm[a]], l));
    std::vector<double> t(5);
    for (int c = 0; c < 5; ++c) t[c] = l * targets[a][c] + (1.0 - l) * targets[perm[a]][c];
    mt.push_back(t);
  }
  std::vector<std::vector<double>> logp;
  oracle::probabilities(net, mx, nn::Mode::kTrain, unl, 12, &logp);
  const auto pu = oracle::probabilities(net, mu, nn::Mode::kTrain, unl, 13);
  double ce = 0.0, sq = 0.0;
  for (std::size_t a = 0; a < nb; ++a)
    for (int c = 0; c < 5; ++c) ce -= mt[a][c] * logp[a][c];
  for (std::size_t a = 0; a < 2 * nb; ++a) sq += oracle::squared_distance(pu[a], mt[nb + a]);
  CHECK(std::abs(r.total - (ce / nb + 10.0 * sq / (nb * 5.0))) < 1e-10);
}

TEST_CASE("every objective has finite-difference gradients") {
  // A small step keeps truncation error below the tolerance; elements whose
  // perturbation crosses a LeakyReLU or max-pool boundary are set aside. At
  // this step cancellation costs about 1e-10 absolute, hence the 1e-4 floor.
  for (nn::Pooling pooling : {nn::Pooling::kSamHV, nn::Pooling::kSamVH, nn::Pooling::kGap}) {
    for (Method m : {Method::kSupervised, Method::kMixup, Method::kPi, Method::kIct, Method::kMixMatch,
                     Method::kSemixup}) {
      CAPTURE(std::string(to_string(m)));
      CAPTURE(std::string(nn::to_string(pooling)));
      nn::Network<double> net(tiny_config(pooling), 21);
      const auto b = make_batches(22);
      const LossConfig cfg;
      const auto g = oracle::check_gradients(
          net,
          [&](nn::Network<double>& n, const StepContext& ctx) {
            Rng rng(23);
            return batch_loss(m, n, b.labeled, b.unlabeled, cfg, rng, ctx).total;
          },
          1e-6, 1e-4, 5, 1e-4);
      CAPTURE(g.max_rel_smooth);
      CAPTURE(g.worst_smooth);
      CHECK(g.over_smooth == 0);
      CHECK(g.params - g.kinked > g.params / 2);
    }
  }
}
