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

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>

#include "semixup/patch.hpp"
#include "semixup/rng.hpp"

namespace semixup::augment {

/// The stochastic augmentation family. Steps always run in this order:
/// gaussian noise, rotation, padding, random crop, gamma.
struct TransformSpec {
  double noise_prob = 0.5;
  double noise_strength = 0.3;  // sigma ~ U(0, strength) on the [-1, 1] scale
  double rotation_prob = 1.0;
  double rotation_degrees = 10.0;  // angle ~ U(-deg, deg)
  double padding_prob = 1.0;
  double padding_fraction = 0.05;  // reflect padding per side, fraction of side
  double crop_prob = 1.0;
  int crop_size = 0;  // 0 keeps the input side length
  double gamma_prob = 0.5;
  double gamma_min = 0.5;
  double gamma_max = 1.5;

  /// Probabilities zeroed: only padding and a (centered) crop remain.
  static TransformSpec identity();
};

void to_json(nlohmann::json& j, const TransformSpec& spec);
void from_json(const nlohmann::json& j, TransformSpec& spec);

/// One concrete draw. Every parameter is drawn regardless of whether its step
/// is active, so the number of random draws per sample is fixed.
struct SampledTransform {
  bool noise_on = false;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  bool rotation_on = false;
  double angle_degrees = 0.0;
  bool padding_on = false;
  double padding_fraction = 0.0;
  bool crop_on = false;
  double crop_u = 0.5;  // relative offsets in [0, 1]; 0.5 is centered
  double crop_v = 0.5;
  int crop_size = 0;
  bool gamma_on = false;
  double gamma = 1.0;

  friend bool operator==(const SampledTransform&, const SampledTransform&) = default;
};

SampledTransform sample_transform(Rng& rng, const TransformSpec& spec);

/// Applies the same geometric parameters to both patches of the pair.
PatchPair apply(const SampledTransform& t, const PatchPair& pair);

/// Rotation about the image center, bilinear, reflect-101 fill.
ImageF rotate(const ImageF& img, double degrees);

ImageF reflect_pad(const ImageF& img, int pad);

}  // namespace semixup::augment
