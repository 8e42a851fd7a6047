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

#include "semixup/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semixup/error.hpp"

namespace semixup::nn {

const char* to_string(Pooling p) {
  switch (p) {
    case Pooling::kSamHV: return "sam_hv";
    case Pooling::kSamVH: return "sam_vh";
    case Pooling::kGap: return "gap";
  }
  return "?";
}

Pooling parse_pooling(const std::string& s) {
  if (s == "sam_hv" || s == "SAM_HV") return Pooling::kSamHV;
  if (s == "sam_vh" || s == "SAM_VH") return Pooling::kSamVH;
  if (s == "gap" || s == "GAP") return Pooling::kGap;
  throw Error(ErrorCode::kInvalidConfig, "unknown pooling '" + s + "'");
}

void NetworkConfig::validate() const {
  if (input_size <= 0 || input_size % 8 != 0)
    throw Error(ErrorCode::kInvalidConfig, "input_size must be a positive multiple of 8");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error(ErrorCode::kInvalidConfig, "dropout must be in [0, 1)");
  for (int w : widths)
    if (w <= 0) throw Error(ErrorCode::kInvalidConfig, "widths must be positive");
  if (n_classes < 2) throw Error(ErrorCode::kInvalidConfig, "need at least two classes");
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = {{"pooling", to_string(c.pooling)},
       {"dropout_rate", c.dropout_rate},
       {"widths", c.widths},
       {"input_size", c.input_size},
       {"n_classes", c.n_classes}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  static const std::vector<std::string> keys = {"pooling", "dropout_rate", "widths", "input_size", "n_classes"};
  for (const auto& [key, value] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw Error(ErrorCode::kInvalidConfig, "unknown network key '" + key + "'");
  const NetworkConfig d;
  c.pooling = j.contains("pooling") ? parse_pooling(j["pooling"].get<std::string>()) : d.pooling;
  c.dropout_rate = j.value("dropout_rate", d.dropout_rate);
  c.widths = j.value("widths", d.widths);
  c.input_size = j.value("input_size", d.input_size);
  c.n_classes = j.value("n_classes", d.n_classes);
  c.validate();
}

// --- params ----------------------------------------------------------------

template <typename T>
typename NetworkParams<T>::Tensor& NetworkParams<T>::get(const std::string& name) {
  for (auto& t : tensors)
    if (t.name == name) return t;
  throw Error(ErrorCode::kInvalidConfig, "no parameter named '" + name + "'");
}

template <typename T>
const typename NetworkParams<T>::Tensor& NetworkParams<T>::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw Error(ErrorCode::kInvalidConfig, "no parameter named '" + name + "'");
}

template <typename T>
std::size_t NetworkParams<T>::total_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.value.size();
  return n;
}

template <typename T>
void NetworkParams<T>::zero_grad() {
  for (auto& t : tensors) std::fill(t.grad.begin(), t.grad.end(), T(0));
}

std::size_t expected_param_count(const NetworkConfig& c) {
  const auto& w = c.widths;
  const std::array<std::pair<int, int>, 9> convs = {{{1, w[0]},
                                                     {w[0], w[0]},
                                                     {w[0], w[0]},
                                                     {w[0], w[1]},
                                                     {w[1], w[1]},
                                                     {w[1], w[2]},
                                                     {w[2], w[2]},
                                                     {w[2], w[3]},
                                                     {w[3], w[3]}}};
  std::size_t n = 0;
  for (const auto& [cin, cout] : convs) n += static_cast<std::size_t>(cout) * cin * 9 + 2 * cout;
  if (c.pooling != Pooling::kGap) n += static_cast<std::size_t>(w[3]) * w[3] + 2 * w[3];
  n += static_cast<std::size_t>(c.n_classes) * 2 * w[3] + c.n_classes;
  return n;
}

template <typename To, typename From>
NetworkParams<To> convert_params(const NetworkParams<From>& params) {
  NetworkParams<To> out;
  for (const auto& t : params.tensors) {
    typename NetworkParams<To>::Tensor c;
    c.name = t.name;
    c.shape = t.shape;
    c.value.assign(t.value.begin(), t.value.end());
    c.grad.assign(t.value.size(), To(0));
    out.tensors.push_back(std::move(c));
  }
  return out;
}

template <typename T>
Batch<T> make_batch(std::span<const PatchPair> pairs) {
  if (pairs.empty()) return {};
  const int s = pairs.front().size();
  Batch<T> b(static_cast<int>(pairs.size()), s);
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].size() != s || pairs[i].medial.width != s)
      throw Error(ErrorCode::kShapeMismatch, "pairs in a batch must share one size");
    T* dst = b.data.data() + i * 2 * plane;
    std::copy(pairs[i].lateral.data.begin(), pairs[i].lateral.data.end(), dst);
    std::copy(pairs[i].medial.data.begin(), pairs[i].medial.data.end(), dst + plane);
  }
  return b;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits, int cols) {
  std::vector<T> out(logits.size());
  const std::size_t rows = logits.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* l = logits.data() + r * cols;
    T* o = out.data() + r * cols;
    const T m = *std::max_element(l, l + cols);
    T sum = 0;
    for (int c = 0; c < cols; ++c) {
      o[c] = std::exp(l[c] - m);
      sum += o[c];
    }
    for (int c = 0; c < cols; ++c) o[c] /= sum;
  }
  return out;
}

// --- network ---------------------------------------------------------------

template <typename T>
void Network<T>::build_specs() {
  const auto& w = config_.widths;
  const int s = config_.input_size;
  blocks_ = {
      {"conv1_1", 1, w[0], 1, s, false},         {"conv1_2", w[0], w[0], 1, s, false},
      {"conv1_3", w[0], w[0], 1, s, true},       {"conv2_1", w[0], w[1], 2, s, false},
      {"conv2_2", w[1], w[1], 1, s / 2, true},   {"conv3_1", w[1], w[2], 2, s / 2, false},
      {"conv3_2", w[2], w[2], 1, s / 4, true},   {"conv4_1", w[2], w[3], 2, s / 4, false},
      {"conv4_2", w[3], w[3], 1, s / 8, true},
  };
}

template <typename T>
Network<T>::Network(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  build_specs();
  Rng rng(seed);
  auto add = [&](const std::string& name, std::vector<int> shape, double stddev, double fill) {
    typename NetworkParams<T>::Tensor t;
    t.name = name;
    t.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : t.shape) n *= static_cast<std::size_t>(d);
    t.value.resize(n);
    for (auto& v : t.value) v = static_cast<T>(stddev > 0.0 ? rng.normal(0.0, stddev) : fill);
    t.grad.assign(n, T(0));
    params_.tensors.push_back(std::move(t));
  };
  for (const auto& b : blocks_) {
    block_param_.push_back(params_.tensors.size());
    add(b.name + ".weight", {b.cout, b.cin, 3, 3}, std::sqrt(2.0 / (b.cin * 9)), 0.0);
    add(b.name + ".gamma", {b.cout}, 0.0, 1.0);
    add(b.name + ".beta", {b.cout}, 0.0, 0.0);
  }
  const int c = config_.widths[3];
  pool_param_ = params_.tensors.size();
  if (config_.pooling != Pooling::kGap) {
    add("sam.weight", {c, c, 1, 1}, std::sqrt(2.0 / c), 0.0);
    add("sam.gamma", {c}, 0.0, 1.0);
    add("sam.beta", {c}, 0.0, 0.0);
  }
  fc_param_ = params_.tensors.size();
  add("fc.weight", {config_.n_classes, 2 * c}, std::sqrt(2.0 / (2 * c)), 0.0);
  add("fc.bias", {config_.n_classes}, 0.0, 0.0);
}

template <typename T>
Network<T>::Network(const NetworkConfig& config, NetworkParams<T> params) : Network(config, 0) {
  if (params.tensors.size() != params_.tensors.size())
    throw Error(ErrorCode::kShapeMismatch, "parameter set does not match the configuration");
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const auto& want = params_.tensors[i];
    auto& got = params.tensors[i];
    if (got.name != want.name || got.shape != want.shape || got.value.size() != want.value.size())
      throw Error(ErrorCode::kShapeMismatch, "parameter '" + got.name + "' does not match '" + want.name + "'");
    got.grad.assign(got.value.size(), T(0));
  }
  params_ = std::move(params);
}

template <typename T>
std::vector<std::array<int, 3>> Network<T>::shape_chain() const {
  std::vector<std::array<int, 3>> out;
  for (const auto& b : blocks_) {
    const int o = conv_out_dim(b.in_size, b.stride);
    out.push_back({b.cout, o, o});
  }
  return out;
}

namespace {

// Each 64-bit draw yields two 32-bit uniforms; unit i is dropped when its
// uniform falls below rate * 2^32.
template <typename T>
void draw_dropout(std::vector<T>& mask, std::size_t n, double rate, Rng& rng) {
  mask.resize(n);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  const auto cut = static_cast<std::uint64_t>(std::ceil(rate * 4294967296.0));
  for (std::size_t i = 0; i < n; i += 2) {
    const std::uint64_t r = rng.next_u64();
    mask[i] = (r & 0xffffffffULL) < cut ? T(0) : keep_scale;
    if (i + 1 < n) mask[i + 1] = (r >> 32) < cut ? T(0) : keep_scale;
  }
}

}  // namespace

template <typename T>
ForwardCache<T> Network<T>::forward(const Batch<T>& input, Mode mode, Rng* rng) const {
  if (input.size != config_.input_size)
    throw Error(ErrorCode::kShapeMismatch, "batch side " + std::to_string(input.size) + " != network input " +
                                               std::to_string(config_.input_size));
  const bool dropout = mode == Mode::kTrain && config_.dropout_rate > 0.0;
  if (dropout && rng == nullptr) throw Error(ErrorCode::kInvalidConfig, "train-mode dropout needs an rng");

  ForwardCache<T> cache;
  const int n = input.n;
  const int images = 2 * n;
  cache.n = n;
  cache.acts.reserve(blocks_.size() + 1);
  cache.acts.push_back(input.data);
  cache.blocks.resize(blocks_.size());

  // Reused across calls: the column buffers are large and zero-filled on growth.
  thread_local ConvScratch<T> scratch;
  std::vector<T> y;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    const int out_side = conv_out_dim(b.in_size, b.stride);
    const int len = out_side * out_side;
    const std::size_t out_plane = static_cast<std::size_t>(b.cout) * len;
    const auto& wt = params_.tensors[block_param_[bi]].value;
    const auto& gamma = params_.tensors[block_param_[bi] + 1].value;
    const auto& beta = params_.tensors[block_param_[bi] + 2].value;

    const std::vector<T>& x = cache.acts[bi];
    y.resize(out_plane * images);
    auto& blk = cache.blocks[bi];
    blk.xhat.resize(out_plane * images);
    blk.invstd.resize(static_cast<std::size_t>(b.cout) * images);
    std::vector<T> act(out_plane * images);
    conv3x3_forward_batch<T>(x, images, b.cin, b.in_size, b.in_size, wt, b.cout, b.stride, y, scratch);
    for (int m = 0; m < images; ++m) {
      norm_act_forward<T>({y.data() + m * out_plane, out_plane}, b.cout, len, gamma, beta,
                          {blk.xhat.data() + m * out_plane, out_plane},
                          {blk.invstd.data() + static_cast<std::size_t>(m) * b.cout, static_cast<std::size_t>(b.cout)},
                          {act.data() + m * out_plane, out_plane});
    }
    if (b.dropout_after && dropout) {
      draw_dropout(blk.mask, act.size(), config_.dropout_rate, *rng);
      for (std::size_t i = 0; i < act.size(); ++i) act[i] *= blk.mask[i];
    }
    cache.acts.push_back(std::move(act));
  }

  const int c = config_.widths[3];
  const int h = config_.bottleneck_size();
  const std::size_t plane = static_cast<std::size_t>(c) * h * h;
  const std::vector<T>& fm = cache.acts.back();
  cache.features.resize(static_cast<std::size_t>(images) * c);
  if (config_.pooling == Pooling::kGap) {
    for (int m = 0; m < images; ++m)
      gap_forward<T>({fm.data() + m * plane, plane}, c, h, h, {cache.features.data() + m * c, static_cast<std::size_t>(c)});
  } else {
    cache.sam.resize(images);
    const auto& sw = params_.tensors[pool_param_].value;
    const auto& sg = params_.tensors[pool_param_ + 1].value;
    const auto& sb = params_.tensors[pool_param_ + 2].value;
    for (int m = 0; m < images; ++m)
      sam_forward<T>({fm.data() + m * plane, plane}, c, h, h, config_.pooling, sw, sg, sb,
                     {cache.features.data() + m * c, static_cast<std::size_t>(c)}, cache.sam[m]);
  }

  // (2N, C) is already (N, 2C) with lateral features first.
  cache.head_input = cache.features;
  if (dropout) {
    draw_dropout(cache.head_mask, cache.head_input.size(), config_.dropout_rate, *rng);
    for (std::size_t i = 0; i < cache.head_input.size(); ++i) cache.head_input[i] *= cache.head_mask[i];
  }

  const int k = config_.n_classes;
  const int f = 2 * c;
  const auto& fw = params_.tensors[fc_param_].value;
  const auto& fb = params_.tensors[fc_param_ + 1].value;
  cache.logits.resize(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i) {
    const T* xi = cache.head_input.data() + static_cast<std::size_t>(i) * f;
    for (int o = 0; o < k; ++o) {
      T s = fb[o];
      const T* wo = fw.data() + static_cast<std::size_t>(o) * f;
      for (int j = 0; j < f; ++j) s += wo[j] * xi[j];
      cache.logits[static_cast<std::size_t>(i) * k + o] = s;
    }
  }
  return cache;
}

template <typename T>
void Network<T>::backward(const ForwardCache<T>& cache, std::span<const T> dlogits) {
  const int n = cache.n;
  const int images = 2 * n;
  const int k = config_.n_classes;
  const int c = config_.widths[3];
  const int f = 2 * c;
  if (dlogits.size() != static_cast<std::size_t>(n) * k)
    throw Error(ErrorCode::kShapeMismatch, "upstream gradient does not match logits");

  auto& fw = params_.tensors[fc_param_];
  auto& fb = params_.tensors[fc_param_ + 1];
  std::vector<T> dfeat(static_cast<std::size_t>(n) * f, T(0));
  for (int i = 0; i < n; ++i) {
    const T* xi = cache.head_input.data() + static_cast<std::size_t>(i) * f;
    T* dxi = dfeat.data() + static_cast<std::size_t>(i) * f;
    for (int o = 0; o < k; ++o) {
      const T g = dlogits[static_cast<std::size_t>(i) * k + o];
      fb.grad[o] += g;
      T* dwo = fw.grad.data() + static_cast<std::size_t>(o) * f;
      const T* wo = fw.value.data() + static_cast<std::size_t>(o) * f;
      for (int j = 0; j < f; ++j) {
        dwo[j] += g * xi[j];
        dxi[j] += g * wo[j];
      }
    }
  }
  if (!cache.head_mask.empty())
    for (std::size_t i = 0; i < dfeat.size(); ++i) dfeat[i] *= cache.head_mask[i];

  const int h = config_.bottleneck_size();
  const std::size_t plane = static_cast<std::size_t>(c) * h * h;
  std::vector<T> dact(plane * images);
  if (config_.pooling == Pooling::kGap) {
    for (int m = 0; m < images; ++m)
      gap_backward<T>(c, h, h, {dfeat.data() + m * c, static_cast<std::size_t>(c)}, {dact.data() + m * plane, plane});
  } else {
    auto& sw = params_.tensors[pool_param_];
    auto& sg = params_.tensors[pool_param_ + 1];
    auto& sb = params_.tensors[pool_param_ + 2];
    for (int m = 0; m < images; ++m)
      sam_backward<T>(c, h, h, config_.pooling, sw.value, sg.value, sb.value, cache.sam[m],
                      {dfeat.data() + m * c, static_cast<std::size_t>(c)}, {dact.data() + m * plane, plane}, sw.grad,
                      sg.grad, sb.grad);
  }

  // Reused across calls: the column buffers are large and zero-filled on growth.
  thread_local ConvScratch<T> scratch;
  std::vector<T> dy;
  std::vector<T> dx;
  for (std::size_t bi = blocks_.size(); bi-- > 0;) {
    const auto& b = blocks_[bi];
    const auto& blk = cache.blocks[bi];
    const int out_side = conv_out_dim(b.in_size, b.stride);
    const int len = out_side * out_side;
    const std::size_t out_plane = static_cast<std::size_t>(b.cout) * len;
    const std::size_t in_plane = static_cast<std::size_t>(b.cin) * b.in_size * b.in_size;
    auto& wt = params_.tensors[block_param_[bi]];
    auto& gamma = params_.tensors[block_param_[bi] + 1];
    auto& beta = params_.tensors[block_param_[bi] + 2];

    if (!blk.mask.empty())
      for (std::size_t i = 0; i < dact.size(); ++i) dact[i] *= blk.mask[i];

    dy.resize(out_plane * images);
    const bool need_dx = bi > 0;
    dx.resize(need_dx ? in_plane * images : 0);
    const std::vector<T>& x = cache.acts[bi];
    for (int m = 0; m < images; ++m)
      norm_act_backward<T>({blk.xhat.data() + m * out_plane, out_plane},
                           {blk.invstd.data() + static_cast<std::size_t>(m) * b.cout, static_cast<std::size_t>(b.cout)},
                           b.cout, len, gamma.value, beta.value, {dact.data() + m * out_plane, out_plane},
                           {dy.data() + m * out_plane, out_plane}, gamma.grad, beta.grad);
    conv3x3_backward_batch<T>(x, images, b.cin, b.in_size, b.in_size, wt.value, b.cout, b.stride, dy, wt.grad, dx,
                              scratch);
    dact.swap(dx);
  }
}

// --- checkpoints -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'M', 'X', 'C', 'K', 'P', 'T', '1'};

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

struct RawCheckpoint {
  nlohmann::json header;
  std::vector<char> payload;
};

RawCheckpoint read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw Error(ErrorCode::kParseError, path.string() + ": bad magic");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(ErrorCode::kParseError, path.string() + ": truncated header");
  RawCheckpoint raw;
  try {
    raw.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  raw.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return raw;
}

template <typename Stored, typename T>
std::vector<T> decode(const std::vector<char>& payload, std::size_t offset, std::size_t count) {
  if (offset + count * sizeof(Stored) > payload.size())
    throw Error(ErrorCode::kParseError, "checkpoint payload truncated");
  std::vector<Stored> tmp(count);
  std::memcpy(tmp.data(), payload.data() + offset, count * sizeof(Stored));
  return std::vector<T>(tmp.begin(), tmp.end());
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Network<T>& net, const nlohmann::json& metadata) {
  static_assert(std::endian::native == std::endian::little);
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : net.params().tensors) {
    const std::size_t nbytes = t.value.size() * sizeof(T);
    tensors.push_back({{"name", t.name}, {"dtype", dtype_name<T>()}, {"shape", t.shape}, {"offset", offset},
                       {"nbytes", nbytes}});
    offset += nbytes;
  }
  const nlohmann::json header = {{"config", net.config()},
                                 {"metadata", metadata.is_null() ? nlohmann::json::object() : metadata},
                                 {"tensors", tensors}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(kMagic, 8);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : net.params().tensors)
    out.write(reinterpret_cast<const char*>(t.value.data()), static_cast<std::streamsize>(t.value.size() * sizeof(T)));
  if (!out) throw Error(ErrorCode::kIoError, "short write " + path.string());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  const RawCheckpoint raw = read_raw(path);
  CheckpointHeader h;
  raw.header.at("config").get_to(h.config);
  h.metadata = raw.header.value("metadata", nlohmann::json::object());
  const auto& tensors = raw.header.at("tensors");
  h.dtype = tensors.empty() ? "f32" : tensors.front().at("dtype").get<std::string>();
  return h;
}

template <typename T>
Network<T> load_checkpoint(const std::filesystem::path& path, nlohmann::json* metadata) {
  const RawCheckpoint raw = read_raw(path);
  NetworkConfig config;
  NetworkParams<T> params;
  try {
    raw.header.at("config").get_to(config);
    for (const auto& t : raw.header.at("tensors")) {
      typename NetworkParams<T>::Tensor tensor;
      tensor.name = t.at("name").get<std::string>();
      tensor.shape = t.at("shape").get<std::vector<int>>();
      std::size_t count = 1;
      for (int d : tensor.shape) count *= static_cast<std::size_t>(d);
      const auto dtype = t.at("dtype").get<std::string>();
      const auto offset = t.at("offset").get<std::size_t>();
      if (dtype == "f32") {
        tensor.value = decode<float, T>(raw.payload, offset, count);
      } else if (dtype == "f64") {
        tensor.value = decode<double, T>(raw.payload, offset, count);
      } else {
        throw Error(ErrorCode::kParseError, "unsupported dtype '" + dtype + "'");
      }
      params.tensors.push_back(std::move(tensor));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (metadata) *metadata = raw.header.value("metadata", nlohmann::json::object());
  return Network<T>(config, std::move(params));
}

template struct NetworkParams<float>;
template struct NetworkParams<double>;
template class Network<float>;
template class Network<double>;
template Batch<float> make_batch<float>(std::span<const PatchPair>);
template Batch<double> make_batch<double>(std::span<const PatchPair>);
template std::vector<float> softmax<float>(std::span<const float>, int);
template std::vector<double> softmax<double>(std::span<const double>, int);
template NetworkParams<float> convert_params<float, float>(const NetworkParams<float>&);
template NetworkParams<float> convert_params<float, double>(const NetworkParams<double>&);
template NetworkParams<double> convert_params<double, float>(const NetworkParams<float>&);
template NetworkParams<double> convert_params<double, double>(const NetworkParams<double>&);
template void save_checkpoint<float>(const std::filesystem::path&, const Network<float>&, const nlohmann::json&);
template void save_checkpoint<double>(const std::filesystem::path&, const Network<double>&, const nlohmann::json&);
template Network<float> load_checkpoint<float>(const std::filesystem::path&, nlohmann::json*);
template Network<double> load_checkpoint<double>(const std::filesystem::path&, nlohmann::json*);

}  // namespace semixup::nn
