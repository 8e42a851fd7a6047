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

// Training objectives.
//
// Every batch loss splits the step rng into a labeled stream (fork 1) and an
// unlabeled stream (fork 2) before drawing anything, so the labeled branch of
// two methods sees the same augmentations, partners, lambdas and dropout
// masks whenever the branches agree. The consistency terms act on softmax
// outputs, and gradients flow through every prediction, including targets
// built from other predictions.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semixup/augment.hpp"
#include "semixup/network.hpp"
#include "semixup/patch.hpp"
#include "semixup/rng.hpp"

namespace semixup::losses {

enum class Method { kSupervised, kMixup, kPi, kIct, kMixMatch, kSemixup };

const char* to_string(Method m);
Method parse_method(const std::string& s);

struct LossWeights {
  double w_in = 2.0;   // ||f(Tx) - f(T'x)||^2
  double w_out = 2.0;  // ||f(x_mix) - f(Tx)||^2 + ||f(x_mix) - f(T'x)||^2
  double w_ic = 4.0;   // ||f(x_mix) - Mix(f(Tx), f(x_j))||^2

  bool all_zero() const { return w_in == 0.0 && w_out == 0.0 && w_ic == 0.0; }
};

struct LossConfig {
  double alpha = 0.75;
  LossWeights weights;
  double pi_weight = 1.0;
  double ict_max_weight = 100.0;
  double ict_rampup_epochs = 80.0;
  double mixmatch_weight = 10.0;
  double mixmatch_temperature = 0.5;
  /// Divisor of the unsupervised sum; 0 means Nb * n_classes.
  double unsupervised_divisor = 0.0;
  augment::TransformSpec augmentation;
  /// Augment labeled images before the supervised branch.
  bool augment_labeled = true;
  /// Test hook: fixes the labeled-branch mixup coefficient.
  std::optional<double> labeled_lambda;
};

void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);

struct MixDraw {
  double lambda = 1.0;
  std::size_t partner = 0;
  bool clamped = false;
};

struct LabeledBatch {
  std::vector<PatchPair> x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
};

struct BatchLossReport {
  double total = 0.0;
  double supervised = 0.0;     // L_l, summed over the labeled batch
  double unsupervised = 0.0;   // weighted L_u
  double in_manifold = 0.0;    // unweighted sums of each term
  double out_manifold = 0.0;
  double interpolation = 0.0;
  double unsup_weight = 0.0;   // scalar weight applied (pi, ict, mixmatch)
  int nb = 0;
  int nc = 0;
};

// --- primitives ------------------------------------------------------------

/// lambda * a + (1 - lambda) * b. Throws ShapeMismatch.
PatchPair mix(const PatchPair& a, const PatchPair& b, double lambda);
std::vector<double> mix(std::span<const double> a, std::span<const double> b, double lambda);

/// Draws the partner index (uniform in [0, n)) then lambda ~ Beta(alpha, alpha).
MixDraw sample_mix(Rng& rng, std::size_t n, double alpha, bool clamp);
/// Lambda only; partner is left at 0.
MixDraw sample_lambda(Rng& rng, double alpha, bool clamp);

/// Cross-entropy of one logit row against a probability target.
double soft_target_ce(std::span<const double> logits, std::span<const double> target);
double soft_cross_entropy(std::span<const double> logits, int y_i, int y_j, double lambda);
double consistency_term(std::span<const double> p, std::span<const double> q);
double interpolation_term(std::span<const double> p_i, std::span<const double> p_j, std::span<const double> p_mix,
                          double lambda);
double oom_terms(std::span<const double> p_mix, std::span<const double> p_t, std::span<const double> p_tprime);
std::vector<double> sharpen(std::span<const double> p, double temperature);

/// w_max * exp(-5 (1 - min(t / rampup, 1))^2).
double ict_ramp(double epoch, double w_max, double rampup_epochs);

// --- batch objectives ------------------------------------------------------
//
// All objectives accumulate d(total)/d(theta) into net.params() grads when
// `grad` is set (callers zero them). `mode` selects dropout; the unlabeled
// batch must match the labeled batch size when a method uses it.

struct StepContext {
  int epoch = 0;
  nn::Mode mode = nn::Mode::kTrain;
  bool grad = true;
  /// When set, every forward pass appends the sign of each LeakyReLU input
  /// and each max-pool winner, so callers can tell whether two evaluations
  /// sit on the same smooth piece of the loss.
  std::vector<std::int32_t>* kink_signature = nullptr;
};

template <typename T>
BatchLossReport batch_loss(Method method, nn::Network<T>& net, const LabeledBatch& labeled,
                           std::span<const PatchPair> unlabeled, const LossConfig& config, Rng& rng,
                           const StepContext& ctx = {});

template <typename T>
BatchLossReport supervised_loss(nn::Network<T>& net, const LabeledBatch& labeled, const LossConfig& config, Rng& rng,
                                const StepContext& ctx = {});
template <typename T>
BatchLossReport mixup_loss(nn::Network<T>& net, const LabeledBatch& labeled, const LossConfig& config, Rng& rng,
                           const StepContext& ctx = {});
template <typename T>
BatchLossReport semixup_batch_loss(nn::Network<T>& net, const LabeledBatch& labeled,
                                   std::span<const PatchPair> unlabeled, const LossConfig& config, Rng& rng,
                                   const StepContext& ctx = {});
template <typename T>
BatchLossReport pi_model_loss(nn::Network<T>& net, const LabeledBatch& labeled, std::span<const PatchPair> unlabeled,
                              const LossConfig& config, Rng& rng, const StepContext& ctx = {});
template <typename T>
BatchLossReport ict_loss(nn::Network<T>& net, const LabeledBatch& labeled, std::span<const PatchPair> unlabeled,
                         const LossConfig& config, Rng& rng, const StepContext& ctx = {});
template <typename T>
BatchLossReport mixmatch_loss(nn::Network<T>& net, const LabeledBatch& labeled, std::span<const PatchPair> unlabeled,
                              const LossConfig& config, Rng& rng, const StepContext& ctx = {});

}  // namespace semixup::losses
