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

// Radiograph preprocessing: 16-bit image plus landmarks in, PatchPair out.
//
//   standardize_intensity -> crop_knee_roi -> center_crop_resize -> extract_patch_pair
//
// Every stage is a pure function of its inputs.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semixup/image.hpp"
#include "semixup/patch.hpp"

namespace semixup::imageprep {

enum class Side { kLeft, kRight };

Side parse_side(const std::string& s);
const char* to_string(Side side);

struct RawImage {
  Image16 pixels;
  double spacing_mm = 1.0;
  Side side = Side::kRight;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Landmarks consumed by the ROI crop. Roles in landmark CSV files:
/// `joint_center`, `plateau_start`, `plateau_end`.
struct LandmarkSet {
  Point joint_center;
  Point plateau_start;
  Point plateau_end;
};

inline constexpr double kRoiSizeMm = 140.0;
inline constexpr double kCenterCropMm = 110.0;
inline constexpr int kResizedSide = 300;
inline constexpr int kPatchSide = 128;
inline constexpr int kImagePadding = 300;

/// Linear-interpolation percentile (numpy's default estimator), q in [0, 100].
double percentile(std::vector<double> values, double q);

/// Clip to [p5, p99], rescale to [0, 1] and quantize to 0..255.
Image8 standardize_intensity(const RawImage& img);

/// Plateau tilt in radians; positive when the line descends to the right in
/// image coordinates (y grows downward).
double plateau_angle(const LandmarkSet& lm);

/// Source coordinates (in the unpadded input frame) sampled for ROI pixel
/// (u, v) when the ROI has `side` pixels and is rotated by `angle`.
Point roi_source_point(const Point& center, double angle, int side, double u, double v);

/// ROI of 140 mm centered at the joint, rotated so the tibial plateau is
/// horizontal. Left knees are mirrored to right-knee orientation first.
Image8 crop_knee_roi(const Image8& img, const LandmarkSet& lm, double spacing_mm, Side side);

/// Central 110 mm of the ROI resized to 300x300.
Image8 center_crop_resize(const Image8& roi, double spacing_mm);

/// Lateral patch from the left image border, medial patch from the right
/// border (flipped), both anchored at row floor(H/3), mapped to [-1, 1].
PatchPair extract_patch_pair(const Image8& img300, int patch_side = kPatchSide);

/// Full chain for one image.
PatchPair preprocess(const RawImage& img, const LandmarkSet& lm);

// --- file ingestion -------------------------------------------------------

/// Reads a 16-bit image: `.png` via libpng or raw little-endian uint16 with a
/// sidecar `<stem>.json` {width, height, spacing_mm, side}. PNG inputs also
/// take spacing and side from the sidecar.
RawImage load_raw_image(const std::filesystem::path& path);
void save_raw_image(const std::filesystem::path& path, const RawImage& img);

/// CSV with header `image_id,role,x,y`. Incomplete landmark sets are
/// reported per image instead of failing the whole file.
struct LandmarkTable {
  std::map<std::string, LandmarkSet> complete;
  std::map<std::string, std::string> problems;
};
LandmarkTable load_landmarks(const std::filesystem::path& path);

}  // namespace semixup::imageprep
