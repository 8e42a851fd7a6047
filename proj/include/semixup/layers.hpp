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

// Per-sample building blocks of the network. All feature maps are dense
// row-major (C, H, W) buffers; backward functions accumulate into parameter
// gradients and overwrite input gradients.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace semixup::nn {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kNormEps = 1e-5;

enum class Pooling { kSamHV, kSamVH, kGap };

/// Shape of a 3x3, zero-padded convolution output.
constexpr int conv_out_dim(int in, int stride) { return (in + 2 - 3) / stride + 1; }

template <typename T>
void conv3x3_forward(std::span<const T> x, int cin, int h, int w, std::span<const T> weight, int cout, int stride,
                     std::span<T> out, std::vector<T>& scratch);

/// `dx` may be empty (no input gradient needed).
template <typename T>
void conv3x3_backward(std::span<const T> x, int cin, int h, int w, std::span<const T> weight, int cout, int stride,
                      std::span<const T> dout, std::span<T> dweight, std::span<T> dx, std::vector<T>& scratch);

template <typename T>
struct ConvScratch {
  std::vector<T> col;
  std::vector<T> wide;
};

/// conv3x3_forward over `images` consecutive inputs, sharing one GEMM per
/// group of images.
template <typename T>
void conv3x3_forward_batch(std::span<const T> x, int images, int cin, int h, int w, std::span<const T> weight,
                           int cout, int stride, std::span<T> out, ConvScratch<T>& scratch);

template <typename T>
void conv3x3_backward_batch(std::span<const T> x, int images, int cin, int h, int w, std::span<const T> weight,
                            int cout, int stride, std::span<const T> dout, std::span<T> dweight, std::span<T> dx,
                            ConvScratch<T>& scratch);

/// Instance norm over the `len` positions of each of `channels` rows, with
/// affine (gamma, beta) and LeakyReLU. Writes xhat, per-row inverse std and
/// the activation.
template <typename T>
void norm_act_forward(std::span<const T> y, int channels, int len, std::span<const T> gamma, std::span<const T> beta,
                      std::span<T> xhat, std::span<T> invstd, std::span<T> act);

/// Given d(act), produces d(y) and accumulates d(gamma), d(beta).
template <typename T>
void norm_act_backward(std::span<const T> xhat, std::span<const T> invstd, int channels, int len,
                       std::span<const T> gamma, std::span<const T> beta, std::span<const T> dact, std::span<T> dy,
                       std::span<T> dgamma, std::span<T> dbeta);

/// Scratch state of one SAM evaluation, kept for the backward pass.
template <typename T>
struct SamCache {
  std::vector<T> pooled;               // C x L after the first directional max
  std::vector<std::int32_t> arg_first;  // flat (h*w) source index per pooled value
  std::vector<T> xhat;                 // C x L
  std::vector<T> invstd;               // C
  std::vector<T> act;                  // C x L
  std::vector<std::int32_t> arg_second;  // position in L per channel
};

/// SAM-VH pools h x 1 first (leaving a 1 x w map), SAM-HV pools 1 x w first.
/// With `normalize` false the 1x1 conv output goes straight to LeakyReLU
/// (used only to probe the pooling structure).
template <typename T>
void sam_forward(std::span<const T> featmap, int channels, int h, int w, Pooling variant, std::span<const T> weight,
                 std::span<const T> gamma, std::span<const T> beta, std::span<T> out, SamCache<T>& cache,
                 bool normalize = true);

template <typename T>
void sam_backward(int channels, int h, int w, Pooling variant, std::span<const T> weight, std::span<const T> gamma,
                  std::span<const T> beta, const SamCache<T>& cache, std::span<const T> dout, std::span<T> dfeatmap,
                  std::span<T> dweight, std::span<T> dgamma, std::span<T> dbeta);

template <typename T>
void gap_forward(std::span<const T> featmap, int channels, int h, int w, std::span<T> out);

template <typename T>
void gap_backward(int channels, int h, int w, std::span<const T> dout, std::span<T> dfeatmap);

}  // namespace semixup::nn
