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

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace semixup {

/// Row-major single-channel image.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return data[static_cast<std::size_t>(y) * width + x];
  }
  const T& at(int x, int y) const {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return data[static_cast<std::size_t>(y) * width + x];
  }

  bool empty() const { return data.empty(); }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Image& a, const Image& b) = default;
};

using Image16 = Image<std::uint16_t>;
using Image8 = Image<std::uint8_t>;
using ImageF = Image<float>;

enum class Border {
  kZero,       // samples outside the image read as 0
  kReflect101  // gfedcb|abcdefgh|gfedcba
};

inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Bilinear sample at continuous pixel coordinates (pixel centers at integers).
template <typename T>
double sample_bilinear(const Image<T>& img, double x, double y, Border border) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto read = [&](int xi, int yi) -> double {
    if (border == Border::kZero) {
      if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return 0.0;
    } else {
      xi = reflect101(xi, img.width);
      yi = reflect101(yi, img.height);
    }
    return static_cast<double>(img.at(xi, yi));
  };
  const double top = (1.0 - ax) * read(x0, y0) + ax * read(x0 + 1, y0);
  const double bottom = (1.0 - ax) * read(x0, y0 + 1) + ax * read(x0 + 1, y0 + 1);
  return (1.0 - ay) * top + ay * bottom;
}

template <typename T>
Image<T> flip_horizontal(const Image<T>& img) {
  Image<T> out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
  return out;
}

template <typename T>
Image<T> crop(const Image<T>& img, int x0, int y0, int w, int h) {
  Image<T> out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  return out;
}

/// Bilinear resize using the half-pixel-center convention; identity when the
/// sizes agree.
template <typename T>
Image<double> resize_bilinear(const Image<T>& img, int out_w, int out_h) {
  Image<double> out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double src_y = (y + 0.5) * sy - 0.5;
    src_y = std::clamp(src_y, 0.0, static_cast<double>(img.height - 1));
    for (int x = 0; x < out_w; ++x) {
      double src_x = (x + 0.5) * sx - 0.5;
      src_x = std::clamp(src_x, 0.0, static_cast<double>(img.width - 1));
      out.at(x, y) = sample_bilinear(img, src_x, src_y, Border::kReflect101);
    }
  }
  return out;
}

}  // namespace semixup
