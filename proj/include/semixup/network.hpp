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

// Siamese knee-grading CNN.
//
// Both patches of a pair run through one shared trunk:
//
//   conv1_1..conv1_3 (w0, s1)  dropout
//   conv2_1 (w1, s2) conv2_2   dropout
//   conv3_1 (w2, s2) conv3_2   dropout
//   conv4_1 (w3, s2) conv4_2   dropout
//   pool (SAM-HV, SAM-VH or GAP) -> w3 features
//
// The two feature vectors are concatenated (lateral first), dropped out and
// mapped by a linear layer to class logits. Every conv block is
// conv3x3 (zero pad, no bias) -> instance norm (affine) -> LeakyReLU(0.2).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "semixup/layers.hpp"
#include "semixup/patch.hpp"
#include "semixup/rng.hpp"

namespace semixup::nn {

struct NetworkConfig {
  Pooling pooling = Pooling::kSamHV;
  double dropout_rate = 0.35;
  std::array<int, 4> widths = {32, 64, 128, 256};
  int input_size = 128;
  int n_classes = kNumGrades;

  /// Throws InvalidConfig when the invariants do not hold.
  void validate() const;
  int bottleneck_size() const { return input_size / 8; }
  int feature_dim() const { return 2 * widths[3]; }
};

const char* to_string(Pooling p);
Pooling parse_pooling(const std::string& s);
void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);

/// Named parameter tensors with parallel gradient buffers.
template <typename T>
struct NetworkParams {
  struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;
  };
  std::vector<Tensor> tensors;

  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  std::size_t total_count() const;
  void zero_grad();
};

enum class Mode { kTrain, kEval };

/// A batch of N pairs laid out as (N, 2, S, S); channel 0 lateral, 1 medial.
/// This is bit-identical to 2N single-channel images ordered
/// lateral_0, medial_0, lateral_1, ...
template <typename T>
struct Batch {
  int n = 0;
  int size = 0;
  std::vector<T> data;

  Batch() = default;
  Batch(int count, int side) : n(count), size(side), data(static_cast<std::size_t>(count) * 2 * side * side) {}

  std::size_t pair_stride() const { return static_cast<std::size_t>(2) * size * size; }
  std::span<T> pair(int i) { return {data.data() + i * pair_stride(), pair_stride()}; }
  std::span<const T> pair(int i) const { return {data.data() + i * pair_stride(), pair_stride()}; }
};

template <typename T>
Batch<T> make_batch(std::span<const PatchPair> pairs);

/// Everything backward needs from one forward call.
template <typename T>
struct ForwardCache {
  struct Block {
    std::vector<T> xhat;
    std::vector<T> invstd;
    std::vector<T> mask;  // empty when dropout was inactive
  };
  int n = 0;
  std::vector<std::vector<T>> acts;  // acts[0] is the input, acts[b+1] block b output
  std::vector<Block> blocks;
  std::vector<SamCache<T>> sam;      // one per trunk image
  std::vector<T> features;           // (N, 2C) before the last dropout
  std::vector<T> head_mask;
  std::vector<T> head_input;         // (N, 2C) after the last dropout
  std::vector<T> logits;             // (N, n_classes)
};

template <typename T>
class Network {
 public:
  Network(const NetworkConfig& config, std::uint64_t seed);
  Network(const NetworkConfig& config, NetworkParams<T> params);

  const NetworkConfig& config() const { return config_; }
  NetworkParams<T>& params() { return params_; }
  const NetworkParams<T>& params() const { return params_; }

  /// Dropout masks are drawn from `rng` only in train mode with a positive
  /// rate; `rng` may be null otherwise.
  ForwardCache<T> forward(const Batch<T>& input, Mode mode, Rng* rng) const;

  /// Accumulates d(loss)/d(param) into params().grad given d(loss)/d(logits).
  void backward(const ForwardCache<T>& cache, std::span<const T> dlogits);

  /// Feature-map shapes (C, H, W) after each conv block, for inspection.
  std::vector<std::array<int, 3>> shape_chain() const;

 private:
  struct BlockSpec {
    std::string name;
    int cin, cout, stride, in_size;
    bool dropout_after;
  };

  NetworkConfig config_;
  NetworkParams<T> params_;
  std::vector<BlockSpec> blocks_;
  std::vector<std::size_t> block_param_;  // index of each block's weight tensor
  std::size_t pool_param_ = 0;
  std::size_t fc_param_ = 0;

  void build_specs();
};

/// Row-wise softmax over (rows, cols).
template <typename T>
std::vector<T> softmax(std::span<const T> logits, int cols);

/// Parameter count from layer shapes alone.
std::size_t expected_param_count(const NetworkConfig& config);

/// Converts parameter values between precisions (gradients are reset).
template <typename To, typename From>
NetworkParams<To> convert_params(const NetworkParams<From>& params);

// --- checkpoints -----------------------------------------------------------
//
// Layout: 8-byte magic "SMXCKPT1", little-endian u64 header length, UTF-8
// JSON header {config, metadata, tensors: [{name, dtype, shape, offset,
// nbytes}]}, then the raw little-endian row-major payloads.

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Network<T>& net, const nlohmann::json& metadata = {});

struct CheckpointHeader {
  NetworkConfig config;
  nlohmann::json metadata;
  std::string dtype;
};

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Loads parameters, converting from the stored dtype if necessary.
template <typename T>
Network<T> load_checkpoint(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

}  // namespace semixup::nn
