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

#include "semixup/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace semixup::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

// Output columns [lo, hi) whose tap kx reads inside a row of width w.
inline void valid_range(int kx, int stride, int w, int wo, int& lo, int& hi) {
  lo = kx == 0 ? 1 : 0;  // ox * stride + kx - 1 >= 0
  hi = std::min(wo, (w - kx) / stride + 1);  // ox * stride + kx - 1 <= w - 1
  hi = std::max(hi, lo);
}

template <typename T>
void im2col(std::span<const T> x, int cin, int h, int w, int stride, T* col, std::size_t ld) {
  const int ho = conv_out_dim(h, stride);
  const int wo = conv_out_dim(w, stride);
  for (int c = 0; c < cin; ++c) {
    const T* src = x.data() + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* dst = col + static_cast<std::size_t>(c * 9 + ky * 3 + kx) * ld;
        int lo, hi;
        valid_range(kx, stride, w, wo, lo, hi);
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - 1;
          T* row = dst + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(row, row + wo, T(0));
            continue;
          }
          const T* srow = src + static_cast<std::size_t>(iy) * w + kx - 1;
          std::fill(row, row + lo, T(0));
          if (stride == 1) {
            std::copy(srow + lo, srow + hi, row + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) row[ox] = srow[ox * stride];
          }
          std::fill(row + hi, row + wo, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, std::size_t ld, int cin, int h, int w, int stride, std::span<T> dx) {
  const int ho = conv_out_dim(h, stride);
  const int wo = conv_out_dim(w, stride);
  std::fill(dx.begin(), dx.end(), T(0));
  for (int c = 0; c < cin; ++c) {
    T* dst = dx.data() + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* src = col + static_cast<std::size_t>(c * 9 + ky * 3 + kx) * ld;
        int lo, hi;
        valid_range(kx, stride, w, wo, lo, hi);
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= h) continue;
          T* drow = dst + static_cast<std::size_t>(iy) * w + kx - 1;
          const T* srow = src + static_cast<std::size_t>(oy) * wo;
          if (stride == 1) {
            for (int ox = lo; ox < hi; ++ox) drow[ox] += srow[ox];
          } else {
            for (int ox = lo; ox < hi; ++ox) drow[ox * stride] += srow[ox];
          }
        }
      }
    }
  }
}

template <typename T>
T leaky(T z) {
  return z > T(0) ? z : static_cast<T>(kLeakySlope) * z;
}

template <typename T>
using ArrayMap = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstArrayMap = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;

}  // namespace

template <typename T>
void conv3x3_forward(std::span<const T> x, int cin, int h, int w, std::span<const T> weight, int cout, int stride,
                     std::span<T> out, std::vector<T>& scratch) {
  const int p = conv_out_dim(h, stride) * conv_out_dim(w, stride);
  const int k = cin * 9;
  scratch.resize(static_cast<std::size_t>(k) * p);
  im2col<T>(x, cin, h, w, stride, scratch.data(), p);
  ConstMapMat<T> wm(weight.data(), cout, k);
  ConstMapMat<T> col(scratch.data(), k, p);
  MapMat<T> o(out.data(), cout, p);
  o.noalias() = wm * col;
}

template <typename T>
void conv3x3_backward(std::span<const T> x, int cin, int h, int w, std::span<const T> weight, int cout, int stride,
                      std::span<const T> dout, std::span<T> dweight, std::span<T> dx, std::vector<T>& scratch) {
  const int p = conv_out_dim(h, stride) * conv_out_dim(w, stride);
  const int k = cin * 9;
  scratch.resize(static_cast<std::size_t>(k) * p);
  im2col<T>(x, cin, h, w, stride, scratch.data(), p);
  ConstMapMat<T> d(dout.data(), cout, p);
  MapMat<T> dw(dweight.data(), cout, k);
  {
    ConstMapMat<T> col(scratch.data(), k, p);
    dw.noalias() += d * col.transpose();
  }
  if (dx.empty()) return;
  ConstMapMat<T> wm(weight.data(), cout, k);
  MapMat<T> dcol(scratch.data(), k, p);
  dcol.noalias() = wm.transpose() * d;
  col2im<T>(scratch.data(), p, cin, h, w, stride, dx);
}

namespace {

// Images per GEMM, bounded so the column buffer stays near 4M values.
int group_size(int images, int k, int p) {
  const std::size_t per_image = static_cast<std::size_t>(k) * p;
  const std::size_t cap = std::max<std::size_t>(1, (std::size_t{1} << 22) / per_image);
  return static_cast<int>(std::min<std::size_t>(images, cap));
}

}  // namespace

template <typename T>
void conv3x3_forward_batch(std::span<const T> x, int images, int cin, int h, int w, std::span<const T> weight,
                           int cout, int stride, std::span<T> out, ConvScratch<T>& scratch) {
  const int p = conv_out_dim(h, stride) * conv_out_dim(w, stride);
  const int k = cin * 9;
  const std::size_t in_plane = static_cast<std::size_t>(cin) * h * w;
  const std::size_t out_plane = static_cast<std::size_t>(cout) * p;
  const int group = group_size(images, k, p);
  ConstMapMat<T> wm(weight.data(), cout, k);
  for (int m0 = 0; m0 < images; m0 += group) {
    const int g = std::min(group, images - m0);
    const std::size_t ld = static_cast<std::size_t>(g) * p;
    scratch.col.resize(static_cast<std::size_t>(k) * ld);
    scratch.wide.resize(static_cast<std::size_t>(cout) * ld);
    for (int m = 0; m < g; ++m)
      im2col<T>(x.subspan((m0 + m) * in_plane, in_plane), cin, h, w, stride, scratch.col.data() + m * p, ld);
    MapMat<T> y(scratch.wide.data(), cout, static_cast<Eigen::Index>(ld));
    y.noalias() = wm * ConstMapMat<T>(scratch.col.data(), k, static_cast<Eigen::Index>(ld));
    for (int m = 0; m < g; ++m)
      for (int co = 0; co < cout; ++co)
        std::copy_n(scratch.wide.data() + co * ld + m * p, p, out.data() + (m0 + m) * out_plane + co * p);
  }
}

template <typename T>
void conv3x3_backward_batch(std::span<const T> x, int images, int cin, int h, int w, std::span<const T> weight,
                            int cout, int stride, std::span<const T> dout, std::span<T> dweight, std::span<T> dx,
                            ConvScratch<T>& scratch) {
  const int p = conv_out_dim(h, stride) * conv_out_dim(w, stride);
  const int k = cin * 9;
  const std::size_t in_plane = static_cast<std::size_t>(cin) * h * w;
  const std::size_t out_plane = static_cast<std::size_t>(cout) * p;
  const int group = group_size(images, k, p);
  ConstMapMat<T> wm(weight.data(), cout, k);
  MapMat<T> dw(dweight.data(), cout, k);
  for (int m0 = 0; m0 < images; m0 += group) {
    const int g = std::min(group, images - m0);
    const std::size_t ld = static_cast<std::size_t>(g) * p;
    scratch.col.resize(static_cast<std::size_t>(k) * ld);
    scratch.wide.resize(static_cast<std::size_t>(cout) * ld);
    for (int m = 0; m < g; ++m) {
      im2col<T>(x.subspan((m0 + m) * in_plane, in_plane), cin, h, w, stride, scratch.col.data() + m * p, ld);
      for (int co = 0; co < cout; ++co)
        std::copy_n(dout.data() + (m0 + m) * out_plane + co * p, p, scratch.wide.data() + co * ld + m * p);
    }
    ConstMapMat<T> d(scratch.wide.data(), cout, static_cast<Eigen::Index>(ld));
    {
      ConstMapMat<T> col(scratch.col.data(), k, static_cast<Eigen::Index>(ld));
      dw.noalias() += d * col.transpose();
    }
    if (dx.empty()) continue;
    MapMat<T> dcol(scratch.col.data(), k, static_cast<Eigen::Index>(ld));
    dcol.noalias() = wm.transpose() * d;
    for (int m = 0; m < g; ++m)
      col2im<T>(scratch.col.data() + m * p, ld, cin, h, w, stride, dx.subspan((m0 + m) * in_plane, in_plane));
  }
}

namespace {

// Sum over [0, n) in eight fixed lanes. Eigen's reductions start at the first
// aligned address, so their rounding would depend on where a buffer lives.
template <typename T, typename F>
T lane_sum(int n, F term) {
  T acc[8] = {};
  int i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] += term(i + l);
  for (; i < n; ++i) acc[i & 7] += term(i);
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace

template <typename T>
void norm_act_forward(std::span<const T> y, int channels, int len, std::span<const T> gamma, std::span<const T> beta,
                      std::span<T> xhat, std::span<T> invstd, std::span<T> act) {
  const T slope = static_cast<T>(kLeakySlope);
  for (int c = 0; c < channels; ++c) {
    const std::size_t off = static_cast<std::size_t>(c) * len;
    ConstArrayMap<T> yc(y.data() + off, len);
    ArrayMap<T> xc(xhat.data() + off, len);
    ArrayMap<T> ac(act.data() + off, len);
    const T* yp = y.data() + off;
    const T mean = lane_sum<T>(len, [&](int i) { return yp[i]; }) / static_cast<T>(len);
    const T var = lane_sum<T>(len, [&](int i) { return (yp[i] - mean) * (yp[i] - mean); }) / static_cast<T>(len);
    const T is = T(1) / std::sqrt(var + static_cast<T>(kNormEps));
    invstd[c] = is;
    xc = (yc - mean) * is;
    // max(z, slope * z) is LeakyReLU for 0 < slope < 1, without a branch.
    ac = (gamma[c] * xc + beta[c]).max(slope * (gamma[c] * xc + beta[c]));
  }
}

template <typename T>
void norm_act_backward(std::span<const T> xhat, std::span<const T> invstd, int channels, int len,
                       std::span<const T> gamma, std::span<const T> beta, std::span<const T> dact, std::span<T> dy,
                       std::span<T> dgamma, std::span<T> dbeta) {
  const T slope = static_cast<T>(kLeakySlope);
  const T inv_len = T(1) / static_cast<T>(len);
  for (int c = 0; c < channels; ++c) {
    const std::size_t off = static_cast<std::size_t>(c) * len;
    ConstArrayMap<T> xc(xhat.data() + off, len);
    ConstArrayMap<T> dac(dact.data() + off, len);
    ArrayMap<T> dz(dy.data() + off, len);  // holds d(pre-activation) first
    dz = (gamma[c] * xc + beta[c] > T(0)).select(dac, slope * dac);
    const T* dzp = dz.data();
    const T* xp = xc.data();
    const T sum_dz = lane_sum<T>(len, [&](int i) { return dzp[i]; });
    const T sum_dz_x = lane_sum<T>(len, [&](int i) { return dzp[i] * xp[i]; });
    dgamma[c] += sum_dz_x;
    dbeta[c] += sum_dz;
    const T g = gamma[c];
    const T mean_dxhat = g * sum_dz * inv_len;
    const T mean_dxhat_x = g * sum_dz_x * inv_len;
    dz = invstd[c] * (g * dz - mean_dxhat - xc * mean_dxhat_x);
  }
}

template <typename T>
void sam_forward(std::span<const T> featmap, int channels, int h, int w, Pooling variant, std::span<const T> weight,
                 std::span<const T> gamma, std::span<const T> beta, std::span<T> out, SamCache<T>& cache,
                 bool normalize) {
  const bool vertical_first = variant == Pooling::kSamVH;
  const int len = vertical_first ? w : h;
  const std::size_t cl = static_cast<std::size_t>(channels) * len;
  cache.pooled.assign(cl, T(0));
  cache.arg_first.assign(cl, 0);
  cache.xhat.assign(cl, T(0));
  cache.invstd.assign(channels, T(1));
  cache.act.assign(cl, T(0));
  cache.arg_second.assign(channels, 0);

  for (int c = 0; c < channels; ++c) {
    const T* f = featmap.data() + static_cast<std::size_t>(c) * h * w;
    for (int l = 0; l < len; ++l) {
      // VH: max over rows of column l. HV: max over columns of row l.
      int best = vertical_first ? l : l * w;
      T best_v = f[best];
      const int span_len = vertical_first ? h : w;
      for (int t = 1; t < span_len; ++t) {
        const int idx = vertical_first ? t * w + l : l * w + t;
        if (f[idx] > best_v) {
          best_v = f[idx];
          best = idx;
        }
      }
      cache.pooled[static_cast<std::size_t>(c) * len + l] = best_v;
      cache.arg_first[static_cast<std::size_t>(c) * len + l] = best;
    }
  }

  std::vector<T> y(cl);
  {
    ConstMapMat<T> wm(weight.data(), channels, channels);
    ConstMapMat<T> pm(cache.pooled.data(), channels, len);
    MapMat<T> ym(y.data(), channels, len);
    ym.noalias() = wm * pm;
  }
  if (normalize) {
    norm_act_forward<T>(y, channels, len, gamma, beta, cache.xhat, cache.invstd, cache.act);
  } else {
    cache.xhat = y;
    for (std::size_t i = 0; i < cl; ++i) cache.act[i] = leaky(y[i]);
  }

  for (int c = 0; c < channels; ++c) {
    const T* a = cache.act.data() + static_cast<std::size_t>(c) * len;
    int best = 0;
    for (int l = 1; l < len; ++l)
      if (a[l] > a[best]) best = l;
    cache.arg_second[c] = best;
    out[c] = a[best];
  }
  // Remember the mode for backward.
  cache.invstd.resize(normalize ? channels : 0);
}

template <typename T>
void sam_backward(int channels, int h, int w, Pooling variant, std::span<const T> weight, std::span<const T> gamma,
                  std::span<const T> beta, const SamCache<T>& cache, std::span<const T> dout, std::span<T> dfeatmap,
                  std::span<T> dweight, std::span<T> dgamma, std::span<T> dbeta) {
  const int len = variant == Pooling::kSamVH ? w : h;
  const std::size_t cl = static_cast<std::size_t>(channels) * len;
  const bool normalized = !cache.invstd.empty();

  std::vector<T> dact(cl, T(0));
  for (int c = 0; c < channels; ++c) dact[static_cast<std::size_t>(c) * len + cache.arg_second[c]] = dout[c];

  std::vector<T> dy(cl);
  if (normalized) {
    norm_act_backward<T>(cache.xhat, cache.invstd, channels, len, gamma, beta, dact, dy, dgamma, dbeta);
  } else {
    for (std::size_t i = 0; i < cl; ++i)
      dy[i] = cache.xhat[i] > T(0) ? dact[i] : static_cast<T>(kLeakySlope) * dact[i];
  }

  std::vector<T> dpooled(cl);
  {
    ConstMapMat<T> dym(dy.data(), channels, len);
    ConstMapMat<T> pm(cache.pooled.data(), channels, len);
    MapMat<T> dwm(dweight.data(), channels, channels);
    dwm.noalias() += dym * pm.transpose();
    ConstMapMat<T> wm(weight.data(), channels, channels);
    MapMat<T> dpm(dpooled.data(), channels, len);
    dpm.noalias() = wm.transpose() * dym;
  }

  std::fill(dfeatmap.begin(), dfeatmap.end(), T(0));
  for (int c = 0; c < channels; ++c) {
    T* df = dfeatmap.data() + static_cast<std::size_t>(c) * h * w;
    for (int l = 0; l < len; ++l) {
      const std::size_t i = static_cast<std::size_t>(c) * len + l;
      df[cache.arg_first[i]] += dpooled[i];
    }
  }
}

template <typename T>
void gap_forward(std::span<const T> featmap, int channels, int h, int w, std::span<T> out) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    T s = 0;
    const T* f = featmap.data() + c * hw;
    for (std::size_t i = 0; i < hw; ++i) s += f[i];
    out[c] = s / static_cast<T>(hw);
  }
}

template <typename T>
void gap_backward(int channels, int h, int w, std::span<const T> dout, std::span<T> dfeatmap) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    const T g = dout[c] / static_cast<T>(hw);
    std::fill(dfeatmap.begin() + c * hw, dfeatmap.begin() + (c + 1) * hw, g);
  }
}

#define SEMIXUP_INSTANTIATE_LAYERS(T)                                                                                \
  template void conv3x3_forward<T>(std::span<const T>, int, int, int, std::span<const T>, int, int, std::span<T>,   \
                                   std::vector<T>&);                                                                 \
  template void conv3x3_backward<T>(std::span<const T>, int, int, int, std::span<const T>, int, int,                \
                                    std::span<const T>, std::span<T>, std::span<T>, std::vector<T>&);                \
  template void conv3x3_forward_batch<T>(std::span<const T>, int, int, int, int, std::span<const T>, int, int,      \
                                         std::span<T>, ConvScratch<T>&);                                             \
  template void conv3x3_backward_batch<T>(std::span<const T>, int, int, int, int, std::span<const T>, int, int,     \
                                          std::span<const T>, std::span<T>, std::span<T>, ConvScratch<T>&);          \
  template void norm_act_forward<T>(std::span<const T>, int, int, std::span<const T>, std::span<const T>,           \
                                    std::span<T>, std::span<T>, std::span<T>);                                       \
  template void norm_act_backward<T>(std::span<const T>, std::span<const T>, int, int, std::span<const T>,          \
                                     std::span<const T>, std::span<const T>, std::span<T>, std::span<T>,             \
                                     std::span<T>);                                                                  \
  template void sam_forward<T>(std::span<const T>, int, int, int, Pooling, std::span<const T>, std::span<const T>,  \
                               std::span<const T>, std::span<T>, SamCache<T>&, bool);                                \
  template void sam_backward<T>(int, int, int, Pooling, std::span<const T>, std::span<const T>, std::span<const T>, \
                                const SamCache<T>&, std::span<const T>, std::span<T>, std::span<T>, std::span<T>,    \
                                std::span<T>);                                                                       \
  template void gap_forward<T>(std::span<const T>, int, int, int, std::span<T>);                                    \
  template void gap_backward<T>(int, int, int, std::span<const T>, std::span<T>);

SEMIXUP_INSTANTIATE_LAYERS(float)
SEMIXUP_INSTANTIATE_LAYERS(double)

#undef SEMIXUP_INSTANTIATE_LAYERS

}  // namespace semixup::nn
