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

#include <filesystem>
#include <string>

#include "semixup/image.hpp"

namespace semixup {

inline constexpr int kNumGrades = 5;

/// One model input: the lateral patch and the horizontally flipped medial
/// patch of a knee, both square and in [-1, 1].
struct PatchPair {
  ImageF lateral;
  ImageF medial;

  PatchPair() = default;
  explicit PatchPair(int size, float fill = 0.0f) : lateral(size, size, fill), medial(size, size, fill) {}
  PatchPair(ImageF lat, ImageF med) : lateral(std::move(lat)), medial(std::move(med)) {}

  int size() const { return lateral.width; }
  bool valid() const;

  friend bool operator==(const PatchPair& a, const PatchPair& b) = default;
};

/// Blob layout: little-endian float32, lateral then medial, row-major. The
/// side length is implied by the file size (8 * side^2 bytes).
void write_pair_blob(const std::filesystem::path& path, const PatchPair& pair);
PatchPair read_pair_blob(const std::filesystem::path& path);

}  // namespace semixup
