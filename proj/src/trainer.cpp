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

#include "semixup/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "semixup/csv.hpp"
#include "semixup/error.hpp"
#include "semixup/evaluate.hpp"

namespace semixup::trainer {

template <typename T>
void adam_step(nn::NetworkParams<T>& params, AdamState<T>& state, const AdamConfig& config) {
  for (const auto& t : params.tensors)
    for (T g : t.grad)
      if (!std::isfinite(static_cast<double>(g)))
        throw Error(ErrorCode::kNonFiniteGradient, "gradient of '" + t.name + "' is not finite");
  if (state.m.empty()) {
    for (const auto& t : params.tensors) {
      state.m.emplace_back(t.value.size(), 0.0);
      state.v.emplace_back(t.value.size(), 0.0);
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    auto& t = params.tensors[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      const double g = t.grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      t.value[i] = static_cast<T>(t.value[i] - config.lr * mhat / (std::sqrt(vhat) + config.eps));
    }
  }
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw Error(ErrorCode::kInvalidConfig, "lr must be positive");
  if (batch_size < 2) throw Error(ErrorCode::kInvalidConfig, "batch_size must be at least 2");
  if (epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be at least 1");
  if (val_every < 1) throw Error(ErrorCode::kInvalidConfig, "val_every must be at least 1");
  if (!(loss.alpha > 0.0)) throw Error(ErrorCode::kInvalidConfig, "alpha must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json weights;
  losses::to_json(weights, c.loss.weights);
  nlohmann::json aug;
  augment::to_json(aug, c.loss.augmentation);
  return {{"method", losses::to_string(c.method)},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"val_every", c.val_every},
          {"seed", c.seed},
          {"alpha", c.loss.alpha},
          {"weights", weights},
          {"pi_weight", c.loss.pi_weight},
          {"ict_max_weight", c.loss.ict_max_weight},
          {"ict_rampup_epochs", c.loss.ict_rampup_epochs},
          {"mixmatch_weight", c.loss.mixmatch_weight},
          {"mixmatch_temperature", c.loss.mixmatch_temperature},
          {"unsupervised_divisor", c.loss.unsupervised_divisor},
          {"augment_labeled", c.loss.augment_labeled},
          {"augmentation", aug}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "training config must be an object");
  const nlohmann::json known = to_json(TrainConfig{});
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::kInvalidConfig, "unknown training key '" + key + "'");
  TrainConfig c;
  try {
    if (j.contains("method")) c.method = losses::parse_method(j["method"].get<std::string>());
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.val_every = j.value("val_every", c.val_every);
    c.seed = j.value("seed", c.seed);
    c.loss.alpha = j.value("alpha", c.loss.alpha);
    if (j.contains("weights")) losses::from_json(j["weights"], c.loss.weights);
    c.loss.pi_weight = j.value("pi_weight", c.loss.pi_weight);
    c.loss.ict_max_weight = j.value("ict_max_weight", c.loss.ict_max_weight);
    c.loss.ict_rampup_epochs = j.value("ict_rampup_epochs", c.loss.ict_rampup_epochs);
    c.loss.mixmatch_weight = j.value("mixmatch_weight", c.loss.mixmatch_weight);
    c.loss.mixmatch_temperature = j.value("mixmatch_temperature", c.loss.mixmatch_temperature);
    c.loss.unsupervised_divisor = j.value("unsupervised_divisor", c.loss.unsupervised_divisor);
    c.loss.augment_labeled = j.value("augment_labeled", c.loss.augment_labeled);
    if (j.contains("augmentation")) augment::from_json(j["augmentation"], c.loss.augmentation);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

Samples load_samples(const std::vector<dataset::Record>& records, const std::filesystem::path& base_dir,
                     const dataset::SynthParams& synth) {
  Samples s;
  for (const auto& r : records) {
    s.x.push_back(dataset::load_pair(r, base_dir, synth));
    if (r.grade) s.y.push_back(*r.grade);
    s.ids.push_back(r.id);
    s.patients.push_back(r.patient_id);
  }
  if (!s.y.empty() && s.y.size() != s.x.size())
    throw Error(ErrorCode::kInvalidConfig, "some records are missing grades");
  return s;
}

nlohmann::json History::summary() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json row = {{"epoch", e.epoch}, {"steps", e.steps}, {"loss", e.loss},
                          {"supervised", e.supervised}, {"unsupervised", e.unsupervised}};
    if (e.validated) {
      row["val_ba"] = e.val_ba;
      row["val_kappa"] = e.val_kappa;
    }
    if (!e.checkpoint.empty()) row["checkpoint"] = e.checkpoint;
    epochs_json.push_back(row);
  }
  return {{"best_epoch", best_epoch}, {"best_val_ba", best_ba}, {"best_val_kappa", best_kappa},
          {"epochs", epochs_json}};
}

void write_history_csv(const std::filesystem::path& path, const History& history) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv_row(out, {"epoch", "steps", "loss", "supervised", "unsupervised", "val_ba", "val_kappa", "checkpoint"});
  for (const auto& e : history.epochs)
    write_csv_row(out, {std::to_string(e.epoch), std::to_string(e.steps), format_double(e.loss),
                        format_double(e.supervised), format_double(e.unsupervised),
                        e.validated ? format_double(e.val_ba) : "", e.validated ? format_double(e.val_kappa) : "",
                        e.checkpoint});
}

template <typename T>
std::vector<double> predict_proba(const nn::Network<T>& net, const std::vector<PatchPair>& x, int batch_size) {
  const int k = net.config().n_classes;
  std::vector<double> out;
  out.reserve(x.size() * k);
  for (std::size_t lo = 0; lo < x.size(); lo += batch_size) {
    const std::size_t hi = std::min(x.size(), lo + static_cast<std::size_t>(batch_size));
    const auto batch = nn::make_batch<T>(std::span<const PatchPair>(x.data() + lo, hi - lo));
    const auto cache = net.forward(batch, nn::Mode::kEval, nullptr);
    const auto p = nn::softmax<T>(cache.logits, k);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

namespace {

// Seed domains, so shuffles and step draws never share a stream.
constexpr std::uint64_t kLabeledOrder = 0x4c4f5244;
constexpr std::uint64_t kUnlabeledOrder = 0x554f5244;
constexpr std::uint64_t kStepDraws = 0x53544550;

bool uses_unlabeled(losses::Method m) {
  return m == losses::Method::kPi || m == losses::Method::kIct || m == losses::Method::kMixMatch ||
         m == losses::Method::kSemixup;
}

// Endless reshuffled stream over unlabeled + labeled images.
class UnlabeledStream {
 public:
  UnlabeledStream(const TrainData& data, std::uint64_t seed) : seed_(seed) {
    for (const auto& p : data.unlabeled.x) pool_.push_back(&p);
    for (const auto& p : data.labeled.x) pool_.push_back(&p);
  }

  std::vector<PatchPair> next(std::size_t n) {
    std::vector<PatchPair> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (cursor_ == order_.size()) reshuffle();
      out.push_back(*pool_[order_[cursor_++]]);
    }
    return out;
  }

 private:
  void reshuffle() {
    order_.resize(pool_.size());
    std::iota(order_.begin(), order_.end(), 0);
    Rng rng(derive_seed(seed_, kUnlabeledOrder, passes_++));
    rng.shuffle(order_.begin(), order_.end());
    cursor_ = 0;
  }

  std::uint64_t seed_;
  std::vector<const PatchPair*> pool_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t passes_ = 0;
};

}  // namespace

template <typename T>
TrainResult<T> train(const TrainConfig& config, const nn::NetworkConfig& net_config, const TrainData& data,
                     const TrainOptions& options) {
  config.validate();
  if (data.labeled.size() == 0) throw Error(ErrorCode::kInsufficientData, "no labeled samples");
  if (data.labeled.y.size() != data.labeled.size())
    throw Error(ErrorCode::kInvalidConfig, "labeled samples need grades");
  if (data.val.size() > 0 && data.val.y.size() != data.val.size())
    throw Error(ErrorCode::kInvalidConfig, "validation samples need grades");

  nn::Network<T> net(net_config, derive_seed(config.seed, 0x494e4954));
  TrainResult<T> result{net, {}};
  AdamState<T> adam;
  const AdamConfig adam_config{config.lr};
  const std::size_t nb = static_cast<std::size_t>(config.batch_size);
  const std::size_t n_labeled = data.labeled.size();
  const int steps = static_cast<int>((n_labeled + nb - 1) / nb);
  UnlabeledStream stream(data, config.seed);
  const bool need_unlabeled = uses_unlabeled(config.method);

  std::ofstream step_log;
  if (!options.run_dir.empty()) {
    std::filesystem::create_directories(options.run_dir / "checkpoints");
    step_log.open(options.run_dir / "train_log.csv");
    write_csv_row(step_log, {"epoch", "step", "total", "supervised", "unsupervised", "in_manifold", "out_manifold",
                             "interpolation", "unsup_weight"});
  }

  std::vector<std::size_t> order(n_labeled);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(config.seed, kLabeledOrder, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order.begin(), order.end());

    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = steps;
    for (int step = 0; step < steps; ++step) {
      losses::LabeledBatch lb;
      for (std::size_t i = 0; i < nb; ++i) {
        const std::size_t idx = order[(static_cast<std::size_t>(step) * nb + i) % n_labeled];
        lb.x.push_back(data.labeled.x[idx]);
        lb.y.push_back(data.labeled.y[idx]);
      }
      std::vector<PatchPair> ub;
      if (need_unlabeled) ub = stream.next(nb);

      Rng rng(derive_seed(derive_seed(config.seed, kStepDraws), static_cast<std::uint64_t>(epoch),
                          static_cast<std::uint64_t>(step)));
      net.params().zero_grad();
      losses::StepContext ctx;
      ctx.epoch = epoch - 1;
      const auto report = losses::batch_loss(config.method, net, lb, ub, config.loss, rng, ctx);
      try {
        adam_step(net.params(), adam, adam_config);
      } catch (const Error& e) {
        throw Error(e.code(), "epoch " + std::to_string(epoch) + ", step " + std::to_string(step) + ": " + e.what());
      }
      rec.loss += report.total;
      rec.supervised += report.supervised / report.nb;
      rec.unsupervised += report.total - report.supervised / report.nb;
      if (step_log.is_open())
        write_csv_row(step_log, {std::to_string(epoch), std::to_string(step), format_double(report.total),
                                 format_double(report.supervised), format_double(report.unsupervised),
                                 format_double(report.in_manifold), format_double(report.out_manifold),
                                 format_double(report.interpolation), format_double(report.unsup_weight)});
    }
    rec.loss /= steps;
    rec.supervised /= steps;
    rec.unsupervised /= steps;

    const bool validate = data.val.size() > 0 && (epoch % config.val_every == 0 || epoch == config.epochs);
    if (validate) {
      const auto probs = predict_proba(net, data.val.x);
      const auto pred = evaluate::argmax_rows(probs, net_config.n_classes);
      rec.validated = true;
      rec.val_ba = evaluate::balanced_accuracy(data.val.y, pred);
      try {
        rec.val_kappa = evaluate::quadratic_kappa(data.val.y, pred, net_config.n_classes);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateLabels) throw;
        rec.val_kappa = 0.0;
      }
    }
    // Without validation data the latest epoch is kept.
    auto& h = result.history;
    const bool better = !validate || rec.val_ba > h.best_ba || (rec.val_ba == h.best_ba && rec.val_kappa > h.best_kappa);
    if (better) {
      h.best_epoch = epoch;
      h.best_ba = validate ? rec.val_ba : h.best_ba;
      h.best_kappa = validate ? rec.val_kappa : h.best_kappa;
      result.best = net;
      if (!options.run_dir.empty()) {
        const auto path = options.run_dir / "checkpoints" / "best.ckpt";
        nn::save_checkpoint(path, net,
                            {{"epoch", epoch}, {"val_ba", rec.val_ba}, {"val_kappa", rec.val_kappa},
                             {"train", to_json(config)}});
        rec.checkpoint = "checkpoints/best.ckpt";
      } else {
        rec.checkpoint = "memory:epoch" + std::to_string(epoch);
      }
    }
    h.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }

  if (!options.run_dir.empty()) {
    write_history_csv(options.run_dir / "history.csv", result.history);
    std::ofstream(options.run_dir / "history.json") << result.history.summary().dump(2) << "\n";
  }
  return result;
}

template void adam_step<float>(nn::NetworkParams<float>&, AdamState<float>&, const AdamConfig&);
template void adam_step<double>(nn::NetworkParams<double>&, AdamState<double>&, const AdamConfig&);
template TrainResult<float> train<float>(const TrainConfig&, const nn::NetworkConfig&, const TrainData&,
                                         const TrainOptions&);
template TrainResult<double> train<double>(const TrainConfig&, const nn::NetworkConfig&, const TrainData&,
                                           const TrainOptions&);
template std::vector<double> predict_proba<float>(const nn::Network<float>&, const std::vector<PatchPair>&, int);
template std::vector<double> predict_proba<double>(const nn::Network<double>&, const std::vector<PatchPair>&, int);

}  // namespace semixup::trainer
