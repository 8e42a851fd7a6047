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

#include "semixup/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semixup/error.hpp"

namespace semixup::augment {

TransformSpec TransformSpec::identity() {
  TransformSpec s;
  s.noise_prob = 0.0;
  s.rotation_prob = 0.0;
  s.crop_prob = 0.0;
  s.gamma_prob = 0.0;
  return s;
}

void to_json(nlohmann::json& j, const TransformSpec& s) {
  j = {{"noise_prob", s.noise_prob},         {"noise_strength", s.noise_strength},
       {"rotation_prob", s.rotation_prob},   {"rotation_degrees", s.rotation_degrees},
       {"padding_prob", s.padding_prob},     {"padding_fraction", s.padding_fraction},
       {"crop_prob", s.crop_prob},           {"crop_size", s.crop_size},
       {"gamma_prob", s.gamma_prob},         {"gamma_min", s.gamma_min},
       {"gamma_max", s.gamma_max}};
}

void from_json(const nlohmann::json& j, TransformSpec& s) {
  const TransformSpec defaults;
  nlohmann::json known;
  to_json(known, defaults);
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::kInvalidConfig, "unknown augmentation key '" + key + "'");
  s.noise_prob = j.value("noise_prob", defaults.noise_prob);
  s.noise_strength = j.value("noise_strength", defaults.noise_strength);
  s.rotation_prob = j.value("rotation_prob", defaults.rotation_prob);
  s.rotation_degrees = j.value("rotation_degrees", defaults.rotation_degrees);
  s.padding_prob = j.value("padding_prob", defaults.padding_prob);
  s.padding_fraction = j.value("padding_fraction", defaults.padding_fraction);
  s.crop_prob = j.value("crop_prob", defaults.crop_prob);
  s.crop_size = j.value("crop_size", defaults.crop_size);
  s.gamma_prob = j.value("gamma_prob", defaults.gamma_prob);
  s.gamma_min = j.value("gamma_min", defaults.gamma_min);
  s.gamma_max = j.value("gamma_max", defaults.gamma_max);
  for (double p : {s.noise_prob, s.rotation_prob, s.padding_prob, s.crop_prob, s.gamma_prob})
    if (p < 0.0 || p > 1.0) throw Error(ErrorCode::kInvalidConfig, "augmentation probability outside [0, 1]");
}

SampledTransform sample_transform(Rng& rng, const TransformSpec& spec) {
  SampledTransform t;
  t.noise_on = rng.bernoulli(spec.noise_prob);
  t.noise_sigma = rng.uniform(0.0, spec.noise_strength);
  t.noise_seed = rng.next_u64();
  t.rotation_on = rng.bernoulli(spec.rotation_prob);
  t.angle_degrees = rng.uniform(-spec.rotation_degrees, spec.rotation_degrees);
  t.padding_on = rng.bernoulli(spec.padding_prob);
  t.padding_fraction = spec.padding_fraction;
  t.crop_on = rng.bernoulli(spec.crop_prob);
  t.crop_u = rng.uniform();
  t.crop_v = rng.uniform();
  t.crop_size = spec.crop_size;
  t.gamma_on = rng.bernoulli(spec.gamma_prob);
  t.gamma = rng.uniform(spec.gamma_min, spec.gamma_max);
  return t;
}

ImageF rotate(const ImageF& img, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  ImageF out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Inverse map: output pixel -> source location.
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = cx + c * dx + s * dy;
      const double sy = cy - s * dx + c * dy;
      out.at(x, y) = static_cast<float>(sample_bilinear(img, sx, sy, Border::kReflect101));
    }
  }
  return out;
}

ImageF reflect_pad(const ImageF& img, int pad) {
  ImageF out(img.width + 2 * pad, img.height + 2 * pad);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y) = img.at(reflect101(x - pad, img.width), reflect101(y - pad, img.height));
  return out;
}

namespace {

ImageF apply_one(const SampledTransform& t, const ImageF& input, std::uint64_t noise_stream) {
  ImageF img = input;
  const int side = input.width;
  if (t.noise_on && t.noise_sigma > 0.0) {
    Rng noise(derive_seed(t.noise_seed, noise_stream));
    for (float& v : img.data) v = std::clamp(static_cast<float>(v + noise.normal(0.0, t.noise_sigma)), -1.0f, 1.0f);
  }
  if (t.rotation_on && t.angle_degrees != 0.0) img = rotate(img, t.angle_degrees);
  if (t.padding_on) {
    const int pad = static_cast<int>(std::lround(t.padding_fraction * side));
    if (pad > 0) img = reflect_pad(img, pad);
  }
  const int crop_side = t.crop_size > 0 ? t.crop_size : side;
  if (crop_side > img.width)
    throw Error(ErrorCode::kShapeMismatch, "crop " + std::to_string(crop_side) + " exceeds image " +
                                               std::to_string(img.width));
  const int slack = img.width - crop_side;
  int ox = slack / 2;
  int oy = slack / 2;
  if (t.crop_on) {
    ox = static_cast<int>(std::lround(t.crop_u * slack));
    oy = static_cast<int>(std::lround(t.crop_v * slack));
  }
  if (slack > 0) img = crop(img, ox, oy, crop_side, crop_side);
  if (t.gamma_on && t.gamma != 1.0) {
    for (float& v : img.data) {
      const double unit = std::clamp((static_cast<double>(v) + 1.0) / 2.0, 0.0, 1.0);
      v = static_cast<float>(2.0 * std::pow(unit, t.gamma) - 1.0);
    }
  }
  for (float& v : img.data) v = std::clamp(v, -1.0f, 1.0f);
  return img;
}

}  // namespace

PatchPair apply(const SampledTransform& t, const PatchPair& pair) {
  return PatchPair(apply_one(t, pair.lateral, 0), apply_one(t, pair.medial, 1));
}

}  // namespace semixup::augment
