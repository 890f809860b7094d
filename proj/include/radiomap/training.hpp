#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radiomap/apps.hpp"
#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/models.hpp"
#include "radiomap/random.hpp"
#include "radiomap/tensor.hpp"

namespace radiomap {

enum class FidelityMode { FixedA, FixedB, RandomAB };

inline std::string to_string(FidelityMode m) {
  switch (m) {
    case FidelityMode::FixedA: return "fixedA";
    case FidelityMode::FixedB: return "fixedB";
    case FidelityMode::RandomAB: return "randomAB";
  }
  return "?";
}

inline FidelityMode fidelity_mode_from_string(const std::string& s) {
  if (s == "fixedA") return FidelityMode::FixedA;
  if (s == "fixedB") return FidelityMode::FixedB;
  if (s == "randomAB") return FidelityMode::RandomAB;
  throw ConfigError("unknown fidelity mode '" + s + "'");
}

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 0;
  FidelityMode fidelity_mode = FidelityMode::FixedB;
  bool select_on_validation = true;
};

inline void validate(const TrainConfig& c) {
  if (!(c.lr > 0)) throw ConfigError("train: lr must be > 0");
  if (!(c.beta1 >= 0 && c.beta1 < 1 && c.beta2 >= 0 && c.beta2 < 1)) throw ConfigError("train: betas must lie in [0, 1)");
  if (!(c.eps > 0)) throw ConfigError("train: eps must be > 0");
  if (c.epochs < 1 || c.batch_size < 1) throw ConfigError("train: epochs and batch_size must be >= 1");
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},         {"betas", {c.beta1, c.beta2}},   {"eps", c.eps},
          {"epochs", c.epochs}, {"batch_size", c.batch_size},    {"seed", c.seed},
          {"fidelity_mode", to_string(c.fidelity_mode)}, {"select_on_validation", c.select_on_validation}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train config: expected a JSON object");
  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "lr") c.lr = v.get<double>();
    else if (key == "betas") {
      auto b = v.get<std::vector<double>>();
      if (b.size() != 2) throw ConfigError("train config: betas needs two values");
      c.beta1 = b[0], c.beta2 = b[1];
    } else if (key == "eps") c.eps = v.get<double>();
    else if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "fidelity_mode") c.fidelity_mode = fidelity_mode_from_string(v.get<std::string>());
    else if (key == "select_on_validation") c.select_on_validation = v.get<bool>();
    else throw ConfigError("train config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Adam.

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  long step = 0;
};

/// One Adam update from the gradients currently stored in `params`. A tensor
/// with no gradient yet is treated as having a zero gradient.
template <typename T>
void adam_step(std::vector<Tensor<T>>& params, AdamState<T>& st, const TrainConfig& cfg) {
  if (st.m.empty()) {
    for (const auto& p : params) {
      st.m.emplace_back(p.numel(), T(0));
      st.v.emplace_back(p.numel(), T(0));
    }
  }
  if (st.m.size() != params.size()) throw ConfigError("adam: optimizer state does not match parameter list");
  ++st.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  const T b1 = T(cfg.beta1), b2 = T(cfg.beta2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto data = params[k].data();
    auto grad = std::as_const(params[k]).grad();
    auto& m = st.m[k];
    auto& v = st.v[k];
    if (m.size() != data.size()) throw ConfigError("adam: optimizer state does not match parameter shapes");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const T g = grad.empty() ? T(0) : grad[i];
      m[i] = b1 * m[i] + (T(1) - b1) * g;
      v[i] = b2 * v[i] + (T(1) - b2) * g * g;
      const double mh = static_cast<double>(m[i]) / c1, vh = static_cast<double>(v[i]) / c2;
      data[i] -= static_cast<T>(cfg.lr * mh / (std::sqrt(vh) + cfg.eps));
    }
  }
}

// ---------------------------------------------------------------------------
// Sample sets and the generic training loop.

/// Fixed-shape supervised samples. `weights` is either empty (plain MSE) or
/// one weight map per sample (weighted squared error, summed per sample).
template <typename T>
struct SampleSet {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<std::vector<T>> inputs;
  std::vector<std::vector<T>> targets;
  std::vector<std::vector<T>> weights;

  std::size_t size() const { return inputs.size(); }
  bool weighted() const { return !weights.empty(); }

  void add(std::vector<T> input, std::vector<T> target, std::vector<T> weight = {}) {
    if (input.size() != channels * height * width || target.size() != height * width)
      throw DataError("sample set: sample does not match declared shape");
    if (!weight.empty() && weight.size() != target.size()) throw DataError("sample set: weight map shape mismatch");
    if (!inputs.empty() && weight.empty() != weights.empty()) throw DataError("sample set: mixed weighted/unweighted samples");
    inputs.push_back(std::move(input));
    targets.push_back(std::move(target));
    if (!weight.empty()) weights.push_back(std::move(weight));
  }

  Tensor<T> input_batch(const std::vector<std::size_t>& idx) const { return gather(inputs, idx, channels); }
  Tensor<T> target_batch(const std::vector<std::size_t>& idx) const { return gather(targets, idx, 1); }
  Tensor<T> weight_batch(const std::vector<std::size_t>& idx) const { return gather(weights, idx, 1); }

 private:
  Tensor<T> gather(const std::vector<std::vector<T>>& src, const std::vector<std::size_t>& idx, std::size_t c) const {
    std::vector<T> v;
    v.reserve(idx.size() * c * height * width);
    for (std::size_t i : idx) v.insert(v.end(), src.at(i).begin(), src.at(i).end());
    return Tensor<T>::from({idx.size(), c, height, width}, std::move(v));
  }
};

/// Mean per-sample loss of a batch: pixel-mean MSE, or the per-sample weighted
/// sum averaged over samples.
template <typename T>
Tensor<T> batch_loss(const SampleSet<T>& set, const std::vector<std::size_t>& idx, const Tensor<T>& pred) {
  if (set.weighted())
    return scale(weighted_mse_loss(pred, set.target_batch(idx), set.weight_batch(idx)), T(1) / T(idx.size()));
  return mse_loss(pred, set.target_batch(idx));
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  double initial_val_loss = 0;
  int best_epoch = 0;  // 1-based; 0 when nothing was selected
  double best_val_loss = 0;
};

template <typename T>
using ForwardFn = std::function<Tensor<T>(const Tensor<T>&)>;

/// Mean loss over a sample set, evaluated in fixed-order chunks.
template <typename T>
double evaluate_loss(const ForwardFn<T>& forward, const SampleSet<T>& set, std::size_t chunk = 8) {
  if (set.size() == 0) throw DataError("evaluate_loss: empty sample set");
  double total = 0;
  for (std::size_t b = 0; b < set.size(); b += chunk) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(set.size(), b + chunk); ++i) idx.push_back(i);
    total += static_cast<double>(batch_loss(set, idx, forward(set.input_batch(idx))).item()) * idx.size();
  }
  return total / static_cast<double>(set.size());
}

template <typename T>
std::vector<std::vector<T>> snapshot(const std::vector<Tensor<T>>& params) {
  std::vector<std::vector<T>> s;
  for (const auto& p : params) s.emplace_back(p.data().begin(), p.data().end());
  return s;
}

template <typename T>
void restore(std::vector<Tensor<T>>& params, const std::vector<std::vector<T>>& s) {
  for (std::size_t k = 0; k < params.size(); ++k) std::copy(s[k].begin(), s[k].end(), params[k].data().begin());
}

/// Seeded mini-batch Adam over `params`. Records train and validation loss
/// per epoch and, with select_on_validation, leaves the parameters at the
/// epoch with the lowest validation loss.
template <typename T>
TrainResult train_loop(std::vector<Tensor<T>> params, const ForwardFn<T>& forward, const SampleSet<T>& train,
                       const SampleSet<T>& val, const TrainConfig& cfg) {
  validate(cfg);
  if (train.size() == 0) throw DataError("train: empty training set");
  if (val.size() == 0) throw DataError("train: empty validation set");
  if (params.empty()) throw ConfigError("train: no trainable parameters");

  TrainResult res;
  res.initial_val_loss = evaluate_loss(forward, val);
  AdamState<T> opt;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::vector<std::vector<T>> best;
  res.best_val_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    double total = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<std::size_t> idx(order.begin() + static_cast<long>(b),
                                   order.begin() + static_cast<long>(std::min(order.size(), b + cfg.batch_size)));
      for (auto& p : params) p.zero_grad();
      Tensor<T> loss = batch_loss(train, idx, forward(train.input_batch(idx)));
      const double l = static_cast<double>(loss.item());
      if (!std::isfinite(l)) throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
      backward(loss);
      adam_step(params, opt, cfg);
      total += l * idx.size();
    }
    EpochRecord rec{epoch, total / static_cast<double>(train.size()), evaluate_loss(forward, val)};
    res.history.push_back(rec);
    if (rec.val_loss < res.best_val_loss) {
      res.best_val_loss = rec.val_loss;
      res.best_epoch = epoch;
      if (cfg.select_on_validation) best = snapshot(params);
    }
  }
  if (cfg.select_on_validation && !best.empty()) restore(params, best);
  if (!cfg.select_on_validation) {
    res.best_epoch = cfg.epochs;
    res.best_val_loss = res.history.back().val_loss;
  }
  return res;
}

/// Any model exposing parameters() and forward().
template <typename T, typename Model>
TrainResult train_supervised(Model& model, const SampleSet<T>& train, const SampleSet<T>& val, const TrainConfig& cfg) {
  return train_loop<T>(model.parameters(), [&](const Tensor<T>& x) { return model.forward(x); }, train, val, cfg);
}

inline void write_history_csv(const TrainResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : r.history) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

/// FNV-1a over the raw parameter bytes.
template <typename T>
std::uint64_t params_hash(const std::vector<Tensor<T>>& params) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p.data().data());
    for (std::size_t i = 0; i < p.numel() * sizeof(T); ++i) h = (h ^ bytes[i]) * 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Sparse measurements.

struct SparseSamples {
  std::vector<Pixel> locations;
  std::vector<double> values;
  std::size_t count() const { return locations.size(); }
};

/// k distinct non-building pixels drawn uniformly, with their gain values.
inline SparseSamples sample_measurements(const Grid& gain, const Scene& scene, std::size_t k, Rng& rng) {
  if (!gain.same_shape(scene.buildings)) throw DataError("sample_measurements: gain and scene shapes differ");
  const auto pool = free_pixels(scene);
  if (k > pool.size())
    throw DataError("sample_measurements: k = " + std::to_string(k) + " exceeds " + std::to_string(pool.size()) +
                    " free pixels");
  SparseSamples s;
  for (std::size_t i : sample_without_replacement(rng, pool.size(), k)) {
    s.locations.push_back(pool[i]);
    s.values.push_back(gain[pool[i]]);
  }
  return s;
}

/// Measurement channel: sampled values at their pixels, zero elsewhere.
inline Grid render_samples(const SparseSamples& s, int height, int width) {
  Grid g(height, width);
  for (std::size_t i = 0; i < s.count(); ++i) g[s.locations[i]] = s.values[i];
  return g;
}

/// Weight 1/K at each sampled pixel, zero elsewhere (all zero when K = 0).
inline Grid sample_weights(const SparseSamples& s, int height, int width) {
  Grid g(height, width);
  for (Pixel p : s.locations) g[p] = 1.0 / static_cast<double>(s.count());
  return g;
}

/// Per-sample measurement count for training inputs, uniform in [lo, hi].
inline std::size_t draw_sample_count(Rng& rng, std::size_t lo, std::size_t hi) {
  if (lo > hi) throw ConfigError("sample count range is empty");
  return static_cast<std::size_t>(uniform_int(rng, static_cast<long>(lo), static_cast<long>(hi)));
}

// ---------------------------------------------------------------------------
// WNet stages.

/// Appends the first UNet's output to every input of `set`, in chunks.
template <typename T>
SampleSet<T> augment_with_first(const UNet<T>& first, const SampleSet<T>& set, std::size_t chunk = 8) {
  SampleSet<T> out;
  out.channels = set.channels + 1;
  out.height = set.height;
  out.width = set.width;
  const std::size_t hw = set.height * set.width;
  for (std::size_t b = 0; b < set.size(); b += chunk) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(set.size(), b + chunk); ++i) idx.push_back(i);
    Tensor<T> y = first.forward(set.input_batch(idx));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      std::vector<T> in = set.inputs[idx[j]];
      in.insert(in.end(), y.data().begin() + static_cast<long>(j * hw), y.data().begin() + static_cast<long>((j + 1) * hw));
      out.add(std::move(in), set.targets[idx[j]], set.weighted() ? set.weights[idx[j]] : std::vector<T>{});
    }
  }
  return out;
}

struct StageResult {
  TrainResult train;
  double first_val_loss = 0;  // the first UNet alone on the validation set
  std::uint64_t first_hash = 0;
};

struct Phase2Options {
  bool passthrough_init = true;
  double residual = 0.01;  // scale on the second UNet's feature weights at init
};

namespace detail {

template <typename T>
void check_first_stage(const WNet<T>& w, const SampleSet<T>& set) {
  if (w.first().parameters().empty()) throw ConfigError("WNet: first UNet is not initialised");
  if (set.channels != static_cast<std::size_t>(w.first().spec().in_channels))
    throw ConfigError("WNet: sample channels (" + std::to_string(set.channels) + ") do not match the first UNet (" +
                      std::to_string(w.first().spec().in_channels) + ")");
}

/// Trains the second UNet on sets already augmented with the first output.
template <typename T>
StageResult train_second_stage(WNet<T>& w, const SampleSet<T>& aug_train, const SampleSet<T>& aug_val,
                               const TrainConfig& cfg, const Phase2Options& opt) {
  w.set_first_frozen(true);
  StageResult res;
  res.first_hash = params_hash(w.first().parameters());
  // The first output is the last channel of the augmented input.
  const std::size_t last = aug_val.channels - 1;
  res.first_val_loss = evaluate_loss<T>([&](const Tensor<T>& x) { return slice_channels(x, last, 1); }, aug_val);
  if (opt.passthrough_init) w.second().set_passthrough(w.first().spec().in_channels, T(opt.residual));
  res.train = train_loop<T>(w.second().parameters(), [&](const Tensor<T>& x) { return w.forward_second(x); }, aug_train,
                            aug_val, cfg);
  if (params_hash(w.first().parameters()) != res.first_hash)
    throw NumericError("WNet: frozen first UNet changed during second-stage training");
  return res;
}

}  // namespace detail

/// Trains only the second UNet on cached first-stage outputs.
template <typename T>
StageResult train_wnet_phase2(WNet<T>& w, const SampleSet<T>& train, const SampleSet<T>& val, const TrainConfig& cfg,
                              const Phase2Options& opt = {}) {
  detail::check_first_stage(w, train);
  return detail::train_second_stage(w, augment_with_first(w.first(), train), augment_with_first(w.first(), val), cfg, opt);
}

/// Second-stage training against sparse refined samples; `train` and `val`
/// carry per-sample weight maps (1/K at measured pixels).
template <typename T>
StageResult adapt_to_refined(WNet<T>& w, const SampleSet<T>& train, const SampleSet<T>& val, const TrainConfig& cfg,
                             const Phase2Options& opt = {}) {
  if (!train.weighted() || !val.weighted()) throw DataError("adapt: sample sets need measurement weights");
  auto any_weight = [](const SampleSet<T>& s) {
    for (const auto& w : s.weights)
      for (T x : w)
        if (x > T(0)) return true;
    return false;
  };
  if (!any_weight(train) || !any_weight(val)) throw DataError("adapt: no sparse measurements in the sample set");
  detail::check_first_stage(w, train);
  return detail::train_second_stage(w, augment_with_first(w.first(), train), augment_with_first(w.first(), val), cfg, opt);
}

inline std::vector<double> default_alpha_schedule() { return {1, 2, 4, 8, 16, 32, 64, 128}; }

/// Replaces each target f with sigmoid(alpha * (f - threshold)).
template <typename T>
SampleSet<T> soft_targets(const SampleSet<T>& gains, double threshold, double alpha) {
  SampleSet<T> s = gains;
  for (auto& t : s.targets)
    for (T& v : t) v = static_cast<T>(soft_coverage_value(static_cast<double>(v), threshold, alpha));
  return s;
}

/// Replaces each target f with the indicator f > threshold.
template <typename T>
SampleSet<T> hard_targets(const SampleSet<T>& gains, double threshold) {
  SampleSet<T> s = gains;
  for (auto& t : s.targets)
    for (T& v : t) v = static_cast<double>(v) > threshold ? T(1) : T(0);
  return s;
}

struct CurriculumResult {
  std::vector<double> alphas;
  std::vector<StageResult> stages;
};

/// Trains a thresholder WNet through the alpha schedule, warm-starting each
/// stage from the previous one. `train`/`val` targets are gain maps.
template <typename T>
CurriculumResult coverage_curriculum(WNet<T>& w, const SampleSet<T>& train, const SampleSet<T>& val, double threshold,
                                     const std::vector<double>& alphas, const TrainConfig& cfg) {
  if (alphas.empty()) throw ConfigError("coverage curriculum: empty alpha schedule");
  if (w.mode() != WNetMode::Thresholder) throw ConfigError("coverage curriculum needs a thresholder WNet");
  for (double a : alphas)
    if (!(a > 0)) throw ConfigError("coverage curriculum: alphas must be > 0");
  detail::check_first_stage(w, train);
  const SampleSet<T> aug_train = augment_with_first(w.first(), train), aug_val = augment_with_first(w.first(), val);
  CurriculumResult res{alphas, {}};
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    TrainConfig stage = cfg;
    stage.seed = cfg.seed + i;
    Phase2Options opt;
    opt.passthrough_init = false;
    res.stages.push_back(detail::train_second_stage(w, soft_targets(aug_train, threshold, alphas[i]),
                                                    soft_targets(aug_val, threshold, alphas[i]), stage, opt));
  }
  return res;
}

}  // namespace radiomap
