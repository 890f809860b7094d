#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "radiomap/apps.hpp"
#include "radiomap/baselines.hpp"
#include "radiomap/checkpoint.hpp"
#include "radiomap/dataset.hpp"
#include "radiomap/models.hpp"
#include "radiomap/training.hpp"

namespace radiomap {

// ---------------------------------------------------------------------------
// Config pieces shared by commands.

inline json to_json(const InputLayout& l) {
  return {{"cars", l.cars}, {"samples", l.samples}, {"samples_min", l.samples_min}, {"samples_max", l.samples_max}};
}

inline InputLayout input_layout_from_json(const json& j) {
  check_keys(j, {"cars", "samples", "samples_min", "samples_max"}, "input");
  InputLayout l;
  l.cars = j.value("cars", l.cars);
  l.samples = j.value("samples", l.samples);
  l.samples_min = j.value("samples_min", l.samples_min);
  l.samples_max = j.value("samples_max", l.samples_max);
  if (l.samples && (l.samples_min < 1 || l.samples_min > l.samples_max))
    throw ConfigError("input: need 1 <= samples_min <= samples_max");
  return l;
}

inline const std::vector<int>& split_ids(const DatasetSplit& s, const std::string& name) {
  if (name == "train") return s.train_map_ids;
  if (name == "val") return s.val_map_ids;
  if (name == "test") return s.test_map_ids;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

/// Fails when any evaluated map id was used for training.
inline void check_split_leakage(const std::vector<int>& train_ids, const std::vector<int>& eval_ids) {
  const std::set<int> train(train_ids.begin(), train_ids.end());
  for (int id : eval_ids)
    if (train.count(id)) throw DataError("split leakage: evaluation map " + std::to_string(id) + " was used in training");
}

// ---------------------------------------------------------------------------
// Prediction and metrics.

/// Clipped single-channel predictions for every sample of `set`.
template <typename T>
std::vector<Grid> predict_grids(const ForwardFn<T>& forward, const SampleSet<T>& set, std::size_t chunk = 8) {
  std::vector<Grid> out;
  for (std::size_t b = 0; b < set.size(); b += chunk) {
    std::vector<std::size_t> idx;
    for (std::size_t i = b; i < std::min(set.size(), b + chunk); ++i) idx.push_back(i);
    const Tensor<T> y = forward(set.input_batch(idx));
    for (std::size_t j = 0; j < idx.size(); ++j) out.push_back(to_grid(y, j));
  }
  return out;
}

template <typename T>
Grid target_grid(const SampleSet<T>& set, std::size_t i) {
  Grid g(static_cast<int>(set.height), static_cast<int>(set.width));
  for (std::size_t p = 0; p < g.size(); ++p) g.values()[p] = static_cast<double>(set.targets[i][p]);
  return g;
}

struct EvalRow {
  std::string id;  // "<map>/<tx>" or "aggregate"
  std::string fidelity;
  std::size_t samples = 0;  // measurement count in the input, 0 for none
  double mse = 0;
  double nmse = 0;
  double rmse_gray = 0;
  double rmse_db = 0;
};

inline EvalRow eval_row(const LinkBudget& lb, std::string id, std::string fidelity, std::size_t samples, const Grid& pred,
                        const Grid& truth) {
  const Metric m = evaluate(lb, pred, truth);
  return {std::move(id), std::move(fidelity), samples, m.rmse_gray * m.rmse_gray, m.nmse, m.rmse_gray, m.rmse_db};
}

/// Mean NMSE and RMSE = sqrt(mean per-sample MSE) over `rows`.
inline EvalRow aggregate(const LinkBudget& lb, const std::vector<EvalRow>& rows, std::string fidelity) {
  if (rows.empty()) throw DataError("aggregate: no rows");
  EvalRow a{"aggregate", std::move(fidelity), 0, 0, 0, 0, 0};
  for (const EvalRow& r : rows) a.mse += r.mse, a.nmse += r.nmse;
  a.mse /= static_cast<double>(rows.size());
  a.nmse /= static_cast<double>(rows.size());
  a.rmse_gray = std::sqrt(a.mse);
  a.rmse_db = scale_db_per_gray(lb) * a.rmse_gray;
  return a;
}

inline void write_metrics_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "id,fidelity,samples,mse,nmse,rmse_gray,rmse_db\n";
  for (const EvalRow& r : rows)
    out << r.id << ',' << r.fidelity << ',' << r.samples << ',' << r.mse << ',' << r.nmse << ',' << r.rmse_gray << ','
        << r.rmse_db << '\n';
}

/// Per-sample rows followed by one aggregate row.
template <typename T>
std::vector<EvalRow> evaluate_set(const ForwardFn<T>& forward, const LabeledSet<T>& ls, const LinkBudget& lb) {
  const auto preds = predict_grids(forward, ls.set);
  std::vector<EvalRow> rows;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const SampleKey& k = ls.keys[i];
    rows.push_back(eval_row(lb, std::to_string(k.map_id) + "/" + std::to_string(k.tx_index), to_string(k.target),
                            k.measurements.count(), preds[i], target_grid(ls.set, i)));
  }
  rows.push_back(aggregate(lb, rows, rows.empty() ? "" : rows.front().fidelity));
  return rows;
}

// ---------------------------------------------------------------------------
// Models loaded from checkpoints.

template <typename T>
struct LoadedModel {
  std::string kind;  // "unet" or "wnet"
  UNet<T> unet;
  WNet<T> wnet;
  json metadata = json::object();

  int in_channels() const { return kind == "wnet" ? wnet.first().spec().in_channels : unet.spec().in_channels; }

  ForwardFn<T> forward() const {
    if (kind == "wnet") return [this](const Tensor<T>& x) { return wnet.forward(x); };
    return [this](const Tensor<T>& x) { return unet.forward(x); };
  }

  InputLayout input() const {
    return metadata.contains("input") ? input_layout_from_json(metadata.at("input")) : InputLayout{};
  }

  std::vector<int> train_map_ids() const {
    return metadata.contains("train_map_ids") ? metadata.at("train_map_ids").get<std::vector<int>>() : std::vector<int>{};
  }
};

template <typename T>
LoadedModel<T> load_model(const std::filesystem::path& path) {
  const Checkpoint ck = read_checkpoint(path);
  LoadedModel<T> m;
  m.kind = ck.header.at("kind").get<std::string>();
  if (m.kind == "unet") {
    m.unet = unet_from_checkpoint<T>(ck);
  } else if (m.kind == "wnet") {
    m.wnet = wnet_from_checkpoint<T>(ck);
  } else {
    throw DataError("checkpoint " + path.string() + " holds a " + m.kind + ", expected a unet or wnet");
  }
  if (ck.header.contains("metadata")) m.metadata = ck.header.at("metadata");
  if (m.in_channels() != m.input().channels())
    throw DataError("checkpoint input layout has " + std::to_string(m.input().channels()) + " channels but the model takes " +
                    std::to_string(m.in_channels()));
  return m;
}

/// Checkpoint metadata tying a model to its data.
inline json model_metadata(const Dataset& d, const InputLayout& layout, const std::string& target) {
  return {{"input", to_json(layout)}, {"target", target}, {"train_map_ids", d.split.train_map_ids},
          {"dataset_seed", d.config.seed}};
}

// ---------------------------------------------------------------------------
// Training pipelines.

template <typename T>
struct TrainedUNet {
  UNet<T> model;
  TrainResult result;
};

/// Seed for the (RandomAB coin, measurement) stream of a built sample set.
inline std::uint64_t set_seed(std::uint64_t seed, int which) { return derive_seed(seed, 0x5e7, static_cast<std::uint64_t>(which)); }

/// Supervised UNet on the dataset's train/val maps with targets chosen by
/// cfg.fidelity_mode.
template <typename T>
TrainedUNet<T> train_radiounet(const Dataset& d, const UNetSpec& spec, std::uint64_t model_seed, const InputLayout& layout,
                               const TrainConfig& cfg, std::optional<UNet<T>> init = std::nullopt) {
  if (spec.in_channels != layout.channels())
    throw ConfigError("model takes " + std::to_string(spec.in_channels) + " input channels but the input layout gives " +
                      std::to_string(layout.channels()));
  const TargetKind target = target_for(cfg.fidelity_mode);
  auto train = build_sample_set<T>(d, d.split.train_map_ids, target, layout, set_seed(cfg.seed, 0));
  auto val = build_sample_set<T>(d, d.split.val_map_ids, target, layout, set_seed(cfg.seed, 1));
  TrainedUNet<T> out{init ? init->clone() : UNet<T>(spec, model_seed), {}};
  if (!(out.model.spec() == spec)) throw ConfigError("initial checkpoint spec differs from the configured spec");
  out.result = train_supervised(out.model, train.set, val.set, cfg);
  return out;
}

template <typename T>
struct TrainedWNet {
  WNet<T> model;
  StageResult result;
};

/// Retrospective second UNet on the frozen first one, same targets.
template <typename T>
TrainedWNet<T> train_retrospective(const Dataset& d, const UNet<T>& first, const InputLayout& layout,
                                   const UNetSpec& second, std::uint64_t second_seed, const TrainConfig& cfg,
                                   const Phase2Options& opt = {}) {
  const TargetKind target = target_for(cfg.fidelity_mode);
  auto train = build_sample_set<T>(d, d.split.train_map_ids, target, layout, set_seed(cfg.seed, 0));
  auto val = build_sample_set<T>(d, d.split.val_map_ids, target, layout, set_seed(cfg.seed, 1));
  TrainedWNet<T> out{WNet<T>({first.spec(), second, WNetMode::Retrospective}, first.clone(), second_seed), {}};
  out.result = train_wnet_phase2(out.model, train.set, val.set, cfg, opt);
  return out;
}

/// Adaptation stage trained on the stored sparse refined samples.
template <typename T>
TrainedWNet<T> train_adaptation(const Dataset& d, const UNet<T>& first, const InputLayout& layout,
                                const UNetSpec& second, std::uint64_t second_seed, const TrainConfig& cfg,
                                const Phase2Options& opt = {}) {
  auto train = build_sparse_refined_set<T>(d, d.split.train_map_ids, layout);
  auto val = build_sparse_refined_set<T>(d, d.split.val_map_ids, layout);
  TrainedWNet<T> out{WNet<T>({first.spec(), second, WNetMode::Adaptation}, first.clone(), second_seed), {}};
  out.result = adapt_to_refined(out.model, train.set, val.set, cfg, opt);
  return out;
}

template <typename T>
struct TrainedCoverage {
  WNet<T> model;
  CurriculumResult result;
};

/// Thresholder WNet trained through the alpha curriculum against gains of
/// the fidelity selected by cfg.fidelity_mode.
template <typename T>
TrainedCoverage<T> train_coverage(const Dataset& d, const UNet<T>& first, const InputLayout& layout,
                                  const UNetSpec& second, std::uint64_t second_seed, double threshold,
                                  const std::vector<double>& alphas, const TrainConfig& cfg) {
  const TargetKind target = target_for(cfg.fidelity_mode);
  auto train = build_sample_set<T>(d, d.split.train_map_ids, target, layout, set_seed(cfg.seed, 0));
  auto val = build_sample_set<T>(d, d.split.val_map_ids, target, layout, set_seed(cfg.seed, 1));
  TrainedCoverage<T> out{WNet<T>({first.spec(), second, WNetMode::Thresholder}, first.clone(), second_seed), {}};
  out.result = coverage_curriculum(out.model, train.set, val.set, threshold, alphas, cfg);
  return out;
}

/// Hard-threshold pixel accuracy and RMSE of coverage predictions.
template <typename T>
std::vector<CoverageMetrics> evaluate_coverage(const ForwardFn<T>& forward, const LabeledSet<T>& gains, double threshold) {
  const auto preds = predict_grids(forward, gains.set);
  std::vector<CoverageMetrics> out;
  for (std::size_t i = 0; i < preds.size(); ++i)
    out.push_back(coverage_metrics(preds[i], hard_coverage(target_grid(gains.set, i), threshold)));
  return out;
}

inline double mean_pixel_accuracy(const std::vector<CoverageMetrics>& m) {
  if (m.empty()) throw DataError("no coverage metrics");
  double s = 0;
  for (const auto& x : m) s += x.pixel_accuracy;
  return s / static_cast<double>(m.size());
}

// ---------------------------------------------------------------------------
// Per-map MLP regression baseline.

/// Last transmitter held out for test, the one before it for validation.
inline TxSplit mlp_tx_split(int tx_count) {
  if (tx_count < 3) throw ConfigError("mlp baseline needs at least 3 transmitters per map");
  TxSplit s;
  for (int j = 0; j < tx_count - 2; ++j) s.train.push_back(j);
  s.val = {tx_count - 2};
  s.test = {tx_count - 1};
  return s;
}

struct MlpEval {
  int map_id = 0;
  int tx_index = 0;
  double nmse = 0;
  double rmse_gray = 0;
};

/// Trains one MLP per map on that map's training transmitters and scores the
/// held-out one against `truth`.
template <typename T>
std::vector<MlpEval> mlp_baseline(const Dataset& d, const std::vector<int>& map_ids, FidelityKind truth,
                                  const MlpSpec& spec, std::uint64_t seed, const TrainConfig& cfg) {
  std::vector<MlpEval> out;
  const TxSplit split = mlp_tx_split(d.config.tx_per_map);
  for (int id : map_ids) {
    const MapRecord& m = d.map(id);
    std::vector<TxMap> maps;
    for (const TxRecord& t : m.txs) maps.push_back({t.tx, t.gain(truth)});
    Mlp<T> model(spec, derive_seed(seed, static_cast<std::uint64_t>(id)));
    train_mlp_baseline(model, maps, split, cfg);
    const int j = split.test.front();
    const Grid pred = render_mlp(model, maps[static_cast<std::size_t>(j)].tx, d.config.size);
    const Grid& ref = maps[static_cast<std::size_t>(j)].gain;
    out.push_back({id, j, nmse(pred, ref), rmse(pred, ref)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// NMSE versus number of measurements.

struct SweepRow {
  std::string method;
  std::size_t k = 0;
  double nmse = 0;
  double rmse_gray = 0;
  std::size_t maps = 0;  // evaluated (map, tx) pairs
};

struct SweepOptions {
  std::vector<std::size_t> ks{5, 10, 20, 50};
  std::vector<std::string> methods{"rbf", "completion", "tomography"};
  FidelityKind truth = FidelityKind::CoarseB;
  std::uint64_t seed = 0;
  CompletionOptions completion;
  int oval_width = 1;
  std::size_t max_pairs = 0;  // 0 = all (map, tx) pairs of the split
};

/// Measurement sets per k, shared by every method so comparisons are paired.
template <typename T>
LabeledSet<T> sweep_set(const Dataset& d, const std::vector<int>& ids, const InputLayout& layout, std::size_t k,
                        const SweepOptions& opt) {
  InputLayout l = layout;
  l.samples = true;
  l.samples_min = l.samples_max = k;
  TargetKind target = opt.truth == FidelityKind::CoarseA   ? TargetKind::CoarseA
                      : opt.truth == FidelityKind::CoarseB ? TargetKind::CoarseB
                                                           : TargetKind::Refined;
  LabeledSet<T> s = build_sample_set<T>(d, ids, target, l, derive_seed(opt.seed, k));
  if (opt.max_pairs && s.set.size() > opt.max_pairs) {
    LabeledSet<T> cut;
    cut.set.channels = s.set.channels, cut.set.height = s.set.height, cut.set.width = s.set.width;
    for (std::size_t i = 0; i < opt.max_pairs; ++i) {
      cut.set.add(s.set.inputs[i], s.set.targets[i]);
      cut.keys.push_back(s.keys[i]);
    }
    return cut;
  }
  return s;
}

/// Sample-based method on one (scene, measurements) pair.
inline Grid run_sample_method(const std::string& method, const Scene& scene, const SparseSamples& s, const LinkBudget& lb,
                              const SweepOptions& opt) {
  if (method == "rbf") return rbf_interpolate(s, scene);
  if (method == "completion") return matrix_complete(s, scene, opt.completion).map;
  if (method == "tomography") {
    const auto fit = tomography_fit(scene, scene.tx, s, lb, opt.oval_width);
    return tomography_predict(scene, scene.tx, fit.model, lb);
  }
  throw ConfigError("unknown baseline method '" + method + "'");
}

/// One row per (method, k). `radiounet_s` (a model whose input layout carries
/// measurements) joins the sweep when given; `constants` are sample-free
/// methods repeated at every k.
template <typename T>
std::vector<SweepRow> nmse_sweep(const Dataset& d, const std::vector<int>& ids, const SweepOptions& opt,
                                 const LoadedModel<T>* radiounet_s = nullptr,
                                 const std::map<std::string, double>& constants = {}) {
  std::vector<SweepRow> rows;
  const LinkBudget& lb = d.config.link_budget;
  for (std::size_t k : opt.ks) {
    const InputLayout base = radiounet_s ? radiounet_s->input() : InputLayout{};
    if (radiounet_s && !base.samples) throw ConfigError("sweep: RadioUNet_S checkpoint takes no measurement channel");
    const LabeledSet<T> s = sweep_set<T>(d, ids, base, k, opt);
    if (radiounet_s) {
      const auto preds = predict_grids(radiounet_s->forward(), s.set);
      SweepRow r{"radiounet_s", k, 0, 0, preds.size()};
      double mse = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const Grid truth = target_grid(s.set, i);
        r.nmse += nmse(preds[i], truth);
        mse += std::pow(rmse(preds[i], truth), 2);
      }
      r.nmse /= static_cast<double>(preds.size());
      r.rmse_gray = std::sqrt(mse / static_cast<double>(preds.size()));
      rows.push_back(r);
    }
    for (const std::string& method : opt.methods) {
      SweepRow r{method, k, 0, 0, s.keys.size()};
      double mse = 0;
      for (std::size_t i = 0; i < s.keys.size(); ++i) {
        const SampleKey& key = s.keys[i];
        const MapRecord& m = d.map(key.map_id);
        const Scene scene = m.scene.with_tx(m.txs[static_cast<std::size_t>(key.tx_index)].tx);
        const Grid truth = target_grid(s.set, i);
        const Grid pred = run_sample_method(method, scene, key.measurements, lb, opt);
        r.nmse += nmse(pred, truth);
        mse += std::pow(rmse(pred, truth), 2);
      }
      r.nmse /= static_cast<double>(s.keys.size());
      r.rmse_gray = std::sqrt(mse / static_cast<double>(s.keys.size()));
      rows.push_back(r);
    }
    for (const auto& [name, value] : constants) rows.push_back({name, k, value, 0, 0});
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "method,k,nmse,rmse_gray,pairs\n";
  for (const SweepRow& r : rows) out << r.method << ',' << r.k << ',' << r.nmse << ',' << r.rmse_gray << ',' << r.maps << '\n';
}

// ---------------------------------------------------------------------------
// Localization runs.

struct LocalizationRun {
  Pixel truth;
  PointEstimate estimate;
  double error = 0;
  bool located = false;
};

struct LocalizationSetup {
  int transmitters = 10;  // K
  int subset_size = 5;    // J
  int trials = 5;         // R
  double eps_min = 0.03;
  double eps_max = 0.03;
  int runs = 50;
  std::uint64_t seed = 0;
};

/// A map function returns the (estimated) radio map of a transmitter at `tx`.
using MapFn = std::function<Grid(const Scene&)>;

/// Places K transmitters on `scene`; each run draws a device position among
/// free pixels that receive at least J usable reports, then localizes it
/// from the true reports against the maps returned by `estimate`.
inline std::vector<LocalizationRun> localization_runs(const Scene& scene, const Fidelity& truth_fid, const LinkBudget& lb,
                                                      const MapFn& estimate, const LocalizationSetup& cfg) {
  Rng rng(cfg.seed);
  const auto pool = free_pixels(scene, true);
  if (pool.size() < static_cast<std::size_t>(cfg.transmitters)) throw DataError("localize: scene too small for K transmitters");
  std::vector<Grid> truth_maps, est_maps;
  const auto candidates = corner_candidates(scene, truth_fid.corner_candidate_stride);
  for (std::size_t i : sample_without_replacement(rng, pool.size(), static_cast<std::size_t>(cfg.transmitters))) {
    const Scene s = scene.with_tx(pool[i]);
    truth_maps.push_back(simulate(s, truth_fid, lb, candidates));
    est_maps.push_back(estimate(s));
  }
  std::vector<Pixel> eligible;
  for (Pixel p : free_pixels(scene)) {
    int usable = 0;
    for (const Grid& g : truth_maps) usable += g[p] > 0;
    if (usable >= cfg.subset_size) eligible.push_back(p);
  }
  if (eligible.empty()) throw NoLocalizationError("localize: no position receives enough usable reports");
  std::vector<LocalizationRun> out;
  for (int r = 0; r < cfg.runs; ++r) {
    LocalizationRun run;
    run.truth = eligible[uniform_index(rng, eligible.size())];
    LocalizationProblem p;
    p.maps = est_maps;
    p.buildings = scene.buildings;
    for (const Grid& g : truth_maps) p.reports.push_back(g[run.truth]);
    p.eps_min = cfg.eps_min;
    p.eps_max = cfg.eps_max;
    p.subset_size = cfg.subset_size;
    p.trials = cfg.trials;
    p.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 1);
    try {
      const LocalizationResult res = localize(p);
      run.estimate = res.estimate;
      run.error = distance(res.estimate, run.truth);
      run.located = true;
    } catch (const NoLocalizationError&) {
      run.error = std::numeric_limits<double>::infinity();
    }
    out.push_back(run);
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw DataError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Model-backed map function; the model's input layout must be sample-free.
template <typename T>
MapFn model_map_fn(const LoadedModel<T>& model) {
  const InputLayout l = model.input();
  if (l.samples) throw ConfigError("localize: the estimator must not take measurement inputs");
  return [&model, l](const Scene& s) {
    const Grid tx = tx_onehot(s);
    std::vector<const Grid*> ch{&s.buildings, &tx};
    if (l.cars) ch.push_back(&s.cars);
    const std::size_t n = static_cast<std::size_t>(s.size());
    return to_grid(model.forward()(Tensor<T>::from({1, static_cast<std::size_t>(l.channels()), n, n}, stack_channels<T>(ch))));
  };
}

// ---------------------------------------------------------------------------
// Timing and scaling fits.

/// Median wall time in seconds of `fn` over `reps` measurements; each
/// measurement repeats `fn` until at least `min_seconds` have elapsed.
inline double median_seconds(const std::function<void()>& fn, int reps = 5, double min_seconds = 0.02) {
  using clock = std::chrono::steady_clock;
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    long calls = 0;
    const auto t0 = clock::now();
    double elapsed = 0;
    do {
      fn();
      ++calls;
      elapsed = std::chrono::duration<double>(clock::now() - t0).count();
    } while (elapsed < min_seconds);
    times.push_back(elapsed / static_cast<double>(calls));
  }
  return median(times);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("loglog_slope: need two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw DataError("loglog_slope: values must be positive");
    mx += std::log(x[i]), my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size()), my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my), sxx += dx * dx;
  }
  if (sxx == 0) throw DataError("loglog_slope: x values are all equal");
  return sxy / sxx;
}

struct BenchRow {
  std::string what;
  double size = 0;
  double seconds = 0;
  double flops = 0;  // analytic count where one exists, else 0
};

struct BenchOptions {
  UNetSpec spec;
  std::vector<int> ns{32, 64, 128};
  std::vector<int> ks{32, 64, 128};
  int reps = 5;
  std::uint64_t seed = 0;
  int completion_iters = 20;
  int grid = 64;  // map size for the RBF, tomography and completion timings
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::map<std::string, double> exponents;
};

inline BenchResult run_bench(const BenchOptions& opt) {
  BenchResult res;
  UNet<float> net(opt.spec, opt.seed);
  std::vector<double> ns, unet_t, flops;
  for (int n : opt.ns) {
    const std::size_t sz = static_cast<std::size_t>(n);
    const Tensor<float> x = Tensor<float>::full({1, static_cast<std::size_t>(opt.spec.in_channels), sz, sz}, 0.5f);
    const double t = median_seconds([&] { (void)net.forward(x); }, opt.reps);
    const double f = static_cast<double>(forward_flops(opt.spec, n));
    res.rows.push_back({"unet_inference", static_cast<double>(n), t, f});
    ns.push_back(n), unet_t.push_back(t), flops.push_back(f);
  }
  res.exponents["unet_inference_n"] = loglog_slope(ns, unet_t);
  res.exponents["unet_flops_n"] = loglog_slope(ns, flops);

  const Scene scene = random_scene(opt.seed, opt.grid);
  const Grid gain = simulate(scene, Fidelity::of(FidelityKind::CoarseB), LinkBudget{});
  std::vector<double> ks, rbf_t;
  for (int k : opt.ks) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(k)));
    const SparseSamples s = sample_measurements(gain, scene, static_cast<std::size_t>(k), rng);
    const double c = mean_nearest_neighbor(s.locations);
    const double t = median_seconds([&] { (void)rbf_weights(s.locations, s.values, c); }, opt.reps);
    res.rows.push_back({"rbf_solve", static_cast<double>(k), t, 0});
    ks.push_back(k), rbf_t.push_back(t);
  }
  res.exponents["rbf_solve_k"] = loglog_slope(ks, rbf_t);

  const double tomo = median_seconds([&] { (void)tomography_predict(scene, scene.tx, {2.0, 1}, LinkBudget{}); }, opt.reps);
  res.rows.push_back({"tomography_map", static_cast<double>(opt.grid), tomo, 0});
  Rng rng(derive_seed(opt.seed, 99));
  const SparseSamples s = sample_measurements(gain, scene, static_cast<std::size_t>(opt.grid), rng);
  CompletionOptions copt;
  copt.iters = opt.completion_iters;
  copt.tol = 0;
  const double comp = median_seconds([&] { (void)matrix_complete(s, scene, copt); }, opt.reps);
  res.rows.push_back({"completion_iteration", static_cast<double>(opt.grid), comp / opt.completion_iters, 0});
  return res;
}

// ---------------------------------------------------------------------------
// Side-by-side comparison strips.

/// Places equally sized grids left to right, separated by `gap` white columns.
inline Grid compose_strip(const std::vector<Grid>& panels, int gap = 2) {
  if (panels.empty()) throw DataError("strip: no panels");
  const int H = panels.front().height(), W = panels.front().width();
  for (const Grid& g : panels)
    if (g.height() != H || g.width() != W) throw DataError("strip: panels differ in size");
  const int n = static_cast<int>(panels.size());
  Grid out(H, n * W + (n - 1) * gap, 1.0);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) out(r, i * (W + gap) + c) = std::clamp(panels[static_cast<std::size_t>(i)](r, c), 0.0, 1.0);
  return out;
}

}  // namespace radiomap
