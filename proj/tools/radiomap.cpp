#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "radiomap/experiments.hpp"

using namespace radiomap;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  bool force = false;
  std::optional<std::uint64_t> seed;
};

void log(const std::string& msg) { std::cerr << "[radiomap] " << msg << '\n'; }

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing required key '") + key + "'");
  return j.at(key).get<T>();
}

/// Output directory from --out or the config's "out"; never inside the dataset.
fs::path output_dir(const Options& o, const json& cfg) {
  std::string out = o.out.empty() ? cfg.value("out", std::string{}) : o.out;
  if (out.empty()) throw ConfigError("no output directory (use --out or set \"out\")");
  if (cfg.contains("dataset") && cfg.at("dataset").is_string()) {
    const fs::path ds = fs::weakly_canonical(cfg.at("dataset").get<std::string>());
    const fs::path od = fs::weakly_canonical(out);
    auto [a, b] = std::mismatch(ds.begin(), ds.end(), od.begin(), od.end());
    if (a == ds.end()) throw ConfigError("output directory must not lie inside the dataset directory");
  }
  prepare_output_dir(out, o.force);
  return out;
}

Dataset open_dataset(const json& cfg) {
  const std::string path = required<std::string>(cfg, "dataset");
  log("loading dataset " + path);
  return load_dataset(path);
}

TrainConfig train_config(const json& cfg, const Options& o) {
  TrainConfig t = cfg.contains("train") ? train_config_from_json(cfg.at("train")) : TrainConfig{};
  if (o.seed) t.seed = *o.seed;
  return t;
}

std::uint64_t model_seed(const json& j, const Options& o) { return o.seed ? *o.seed : j.value("seed", std::uint64_t{0}); }

bool use_double(const json& cfg) {
  const std::string p = cfg.value("precision", std::string("float"));
  if (p != "float" && p != "double") throw ConfigError("precision must be \"float\" or \"double\"");
  return p == "double";
}

void write_final_row(const TrainResult& r, const EvalRow& val, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "epochs,best_epoch,initial_val_loss,best_val_loss,val_nmse,val_rmse_gray,val_rmse_db\n";
  out << r.history.size() << ',' << r.best_epoch << ',' << r.initial_val_loss << ',' << r.best_val_loss << ',' << val.nmse
      << ',' << val.rmse_gray << ',' << val.rmse_db << '\n';
}

FidelityKind truth_kind(const json& cfg, const char* key = "truth") {
  return fidelity_from_string(cfg.value(key, std::string("coarseB")));
}

TargetKind as_target(FidelityKind k) {
  switch (k) {
    case FidelityKind::CoarseA: return TargetKind::CoarseA;
    case FidelityKind::CoarseB: return TargetKind::CoarseB;
    case FidelityKind::Refined: return TargetKind::Refined;
  }
  return TargetKind::CoarseB;
}

// ---------------------------------------------------------------------------

int cmd_gen_dataset(const Options& o) {
  const json cfg = load_config(o.config);
  check_keys(cfg, {"dataset", "out"}, "gen-dataset config");
  DatasetConfig dc = dataset_config_from_json(cfg.value("dataset", json::object()));
  if (o.seed) dc.seed = *o.seed;
  const fs::path out = output_dir(o, json{{"out", cfg.value("out", std::string{})}});
  log("generating " + std::to_string(dc.maps) + " maps x " + std::to_string(dc.tx_per_map) + " transmitters at " +
      std::to_string(dc.size) + "^2");
  save_dataset(generate_dataset(dc), out, true);
  log("wrote " + out.string());
  return 0;
}

template <typename T>
int cmd_train(const Options& o, const json& cfg) {
  check_keys(cfg, {"dataset", "model", "train", "precision", "out", "init_checkpoint"}, "train config");
  const json model = required<json>(cfg, "model");
  check_keys(model, {"kind", "spec", "seed", "input", "first_checkpoint", "residual"}, "model");
  const std::string kind = model.value("kind", std::string("unet"));
  const TrainConfig tc = train_config(cfg, o);
  const Dataset d = open_dataset(cfg);
  const fs::path out = output_dir(o, cfg);
  const UNetSpec spec = unet_spec_from_json(required<json>(model, "spec"));

  if (kind == "unet") {
    const InputLayout layout = model.contains("input") ? input_layout_from_json(model.at("input")) : InputLayout{};
    std::optional<UNet<T>> init;
    if (cfg.contains("init_checkpoint")) init = load_unet<T>(cfg.at("init_checkpoint").get<std::string>());
    log("training UNet (" + std::to_string(param_count(spec)) + " parameters) for " + std::to_string(tc.epochs) + " epochs");
    auto t = train_radiounet<T>(d, spec, model_seed(model, o), layout, tc, init);
    save_checkpoint(t.model, out / "model.ckpt", model_metadata(d, layout, to_string(tc.fidelity_mode)));
    write_history_csv(t.result, out / "history.csv");
    auto val = build_sample_set<T>(d, d.split.val_map_ids, target_for(tc.fidelity_mode), layout, set_seed(tc.seed, 1));
    const auto rows = evaluate_set<T>([&](const Tensor<T>& x) { return t.model.forward(x); }, val, d.config.link_budget);
    write_final_row(t.result, rows.back(), out / "metrics.csv");
    return 0;
  }
  if (kind == "wnet") {
    const LoadedModel<T> first = load_model<T>(required<std::string>(model, "first_checkpoint"));
    if (first.kind != "unet") throw ConfigError("first_checkpoint must hold a UNet");
    check_split_leakage(first.train_map_ids(), d.split.test_map_ids);
    Phase2Options opt;
    opt.residual = model.value("residual", opt.residual);
    const InputLayout layout = first.input();
    log("training retrospective second UNet for " + std::to_string(tc.epochs) + " epochs");
    auto t = train_retrospective<T>(d, first.unet, layout, spec, model_seed(model, o), tc, opt);
    save_checkpoint(t.model, out / "model.ckpt", model_metadata(d, layout, to_string(tc.fidelity_mode)));
    write_history_csv(t.result.train, out / "history.csv");
    auto val = build_sample_set<T>(d, d.split.val_map_ids, target_for(tc.fidelity_mode), layout, set_seed(tc.seed, 1));
    const auto rows = evaluate_set<T>([&](const Tensor<T>& x) { return t.model.forward(x); }, val, d.config.link_budget);
    write_final_row(t.result.train, rows.back(), out / "metrics.csv");
    return 0;
  }
  throw ConfigError("model.kind must be \"unet\" or \"wnet\"");
}

template <typename T>
int cmd_adapt(const Options& o, const json& cfg) {
  check_keys(cfg, {"dataset", "first_checkpoint", "second", "train", "residual", "precision", "out"}, "adapt config");
  const TrainConfig tc = train_config(cfg, o);
  const json second = required<json>(cfg, "second");
  check_keys(second, {"spec", "seed"}, "second");
  const Dataset d = open_dataset(cfg);
  const fs::path out = output_dir(o, cfg);
  const LoadedModel<T> first = load_model<T>(required<std::string>(cfg, "first_checkpoint"));
  if (first.kind != "unet") throw ConfigError("first_checkpoint must hold a UNet");
  Phase2Options opt;
  opt.residual = cfg.value("residual", opt.residual);
  log("adapting to sparse refined samples for " + std::to_string(tc.epochs) + " epochs");
  auto t = train_adaptation<T>(d, first.unet, first.input(), unet_spec_from_json(required<json>(second, "spec")),
                               model_seed(second, o), tc, opt);
  save_checkpoint(t.model, out / "model.ckpt", model_metadata(d, first.input(), "refined"));
  write_history_csv(t.result.train, out / "history.csv");
  auto val = build_sample_set<T>(d, d.split.val_map_ids, TargetKind::Refined, first.input(), 0);
  const auto rows = evaluate_set<T>([&](const Tensor<T>& x) { return t.model.forward(x); }, val, d.config.link_budget);
  write_final_row(t.result.train, rows.back(), out / "metrics.csv");
  return 0;
}

template <typename T>
int cmd_train_coverage(const Options& o, const json& cfg) {
  check_keys(cfg, {"dataset", "first_checkpoint", "second", "threshold", "alphas", "train", "precision", "out"},
             "train-coverage config");
  const TrainConfig tc = train_config(cfg, o);
  const json second = required<json>(cfg, "second");
  check_keys(second, {"spec", "seed"}, "second");
  const double threshold = cfg.value("threshold", 0.5);
  const auto alphas = cfg.value("alphas", default_alpha_schedule());
  const Dataset d = open_dataset(cfg);
  const fs::path out = output_dir(o, cfg);
  const LoadedModel<T> first = load_model<T>(required<std::string>(cfg, "first_checkpoint"));
  if (first.kind != "unet") throw ConfigError("first_checkpoint must hold a UNet");
  log("coverage curriculum over " + std::to_string(alphas.size()) + " stages");
  auto t = train_coverage<T>(d, first.unet, first.input(), unet_spec_from_json(required<json>(second, "spec")),
                             model_seed(second, o), threshold, alphas, tc);
  json meta = model_metadata(d, first.input(), to_string(tc.fidelity_mode));
  meta["threshold"] = threshold;
  save_checkpoint(t.model, out / "model.ckpt", meta);
  TrainResult all;
  int epoch = 0;
  for (const auto& s : t.result.stages)
    for (EpochRecord e : s.train.history) {
      e.epoch = ++epoch;
      all.history.push_back(e);
    }
  write_history_csv(all, out / "history.csv");
  auto val = build_sample_set<T>(d, d.split.val_map_ids, target_for(tc.fidelity_mode), first.input(), set_seed(tc.seed, 1));
  const auto m = evaluate_coverage<T>([&](const Tensor<T>& x) { return t.model.forward(x); }, val, threshold);
  std::ofstream f(out / "metrics.csv");
  f.precision(17);
  f << "stages,epochs,val_pixel_accuracy\n" << alphas.size() << ',' << epoch << ',' << mean_pixel_accuracy(m) << '\n';
  return 0;
}

template <typename T>
int cmd_eval(const Options& o, const json& cfg) {
  check_keys(cfg, {"dataset", "checkpoint", "split", "fidelities", "seed", "precision", "out"}, "eval config");
  const Dataset d = open_dataset(cfg);
  const LoadedModel<T> m = load_model<T>(required<std::string>(cfg, "checkpoint"));
  const auto& ids = split_ids(d.split, cfg.value("split", std::string("test")));
  check_split_leakage(m.train_map_ids(), ids);
  const fs::path out = output_dir(o, cfg);
  const std::uint64_t seed = o.seed ? *o.seed : cfg.value("seed", std::uint64_t{0});
  std::vector<EvalRow> rows;
  for (const std::string& f : cfg.value("fidelities", std::vector<std::string>{"coarseB"})) {
    auto set = build_sample_set<T>(d, ids, as_target(fidelity_from_string(f)), m.input(), seed);
    const auto r = evaluate_set<T>(m.forward(), set, d.config.link_budget);
    log(f + ": NMSE " + std::to_string(r.back().nmse) + ", RMSE " + std::to_string(r.back().rmse_gray) + " gray");
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_metrics_csv(rows, out / "metrics.csv");
  return 0;
}

template <typename T>
int cmd_baseline(const Options& o, const json& cfg) {
  check_keys(cfg,
             {"dataset", "split", "truth", "ks", "methods", "radiounet_s", "radiounet_c", "mlp", "completion", "oval_width",
              "max_pairs", "seed", "precision", "out"},
             "baseline config");
  const Dataset d = open_dataset(cfg);
  const auto& ids = split_ids(d.split, cfg.value("split", std::string("test")));
  SweepOptions opt;
  opt.ks = cfg.value("ks", opt.ks);
  opt.methods = cfg.value("methods", opt.methods);
  opt.truth = truth_kind(cfg);
  opt.seed = o.seed ? *o.seed : cfg.value("seed", std::uint64_t{0});
  opt.oval_width = cfg.value("oval_width", opt.oval_width);
  opt.max_pairs = cfg.value("max_pairs", opt.max_pairs);
  if (cfg.contains("completion")) {
    const json& c = cfg.at("completion");
    check_keys(c, {"tau", "step", "iters", "tol"}, "completion");
    opt.completion.tau = c.value("tau", opt.completion.tau);
    opt.completion.step = c.value("step", opt.completion.step);
    opt.completion.iters = c.value("iters", opt.completion.iters);
    opt.completion.tol = c.value("tol", opt.completion.tol);
  }
  std::optional<LoadedModel<T>> s_model;
  std::map<std::string, double> constants;
  if (cfg.contains("radiounet_s")) {
    s_model = load_model<T>(cfg.at("radiounet_s").get<std::string>());
    check_split_leakage(s_model->train_map_ids(), ids);
  }
  if (cfg.contains("radiounet_c")) {
    const LoadedModel<T> c = load_model<T>(cfg.at("radiounet_c").get<std::string>());
    check_split_leakage(c.train_map_ids(), ids);
    auto set = build_sample_set<T>(d, ids, as_target(opt.truth), c.input(), opt.seed);
    constants["radiounet_c"] = evaluate_set<T>(c.forward(), set, d.config.link_budget).back().nmse;
  }
  if (cfg.contains("mlp")) {
    const json& mj = cfg.at("mlp");
    check_keys(mj, {"spec", "seed", "train"}, "mlp");
    const MlpSpec spec = mj.contains("spec") ? mlp_spec_from_json(mj.at("spec")) : MlpSpec{};
    const TrainConfig tc = mj.contains("train") ? train_config_from_json(mj.at("train")) : TrainConfig{};
    log("training per-map MLP baselines on " + std::to_string(ids.size()) + " maps");
    const auto evals = mlp_baseline<T>(d, ids, opt.truth, spec, mj.value("seed", std::uint64_t{0}), tc);
    double s = 0;
    for (const auto& e : evals) s += e.nmse;
    constants["mlp"] = s / static_cast<double>(evals.size());
  }
  const fs::path out = output_dir(o, cfg);
  log("sweeping k over " + std::to_string(opt.ks.size()) + " values");
  const auto rows = nmse_sweep<T>(d, ids, opt, s_model ? &*s_model : nullptr, constants);
  write_sweep_csv(rows, out / "sweep.csv");
  return 0;
}

template <typename T>
int cmd_localize(const Options& o, const json& cfg) {
  check_keys(cfg,
             {"dataset", "map_id", "checkpoint", "truth", "transmitters", "subset_size", "trials", "eps_min", "eps_max",
              "runs", "seed", "precision", "out"},
             "localize config");
  const Dataset d = open_dataset(cfg);
  if (d.split.test_map_ids.empty()) throw DataError("dataset has no test maps");
  const int map_id = cfg.value("map_id", d.split.test_map_ids.front());
  if (map_id < 0 || map_id >= static_cast<int>(d.maps.size())) throw ConfigError("map_id out of range");
  LocalizationSetup ls;
  ls.transmitters = cfg.value("transmitters", ls.transmitters);
  ls.subset_size = cfg.value("subset_size", ls.subset_size);
  ls.trials = cfg.value("trials", ls.trials);
  ls.eps_min = cfg.value("eps_min", ls.eps_min);
  ls.eps_max = cfg.value("eps_max", ls.eps_max);
  ls.runs = cfg.value("runs", ls.runs);
  ls.seed = o.seed ? *o.seed : cfg.value("seed", ls.seed);
  const Fidelity fid = fidelity_of(d.config, truth_kind(cfg));
  const LinkBudget& lb = d.config.link_budget;
  std::optional<LoadedModel<T>> model;
  MapFn estimate = [&](const Scene& s) { return simulate(s, fid, lb); };
  if (cfg.contains("checkpoint")) {
    model = load_model<T>(cfg.at("checkpoint").get<std::string>());
    check_split_leakage(model->train_map_ids(), {map_id});
    estimate = model_map_fn(*model);
  }
  const fs::path out = output_dir(o, cfg);
  const auto runs = localization_runs(d.map(map_id).scene, fid, lb, estimate, ls);
  std::ofstream f(out / "localize.csv");
  f.precision(17);
  f << "run,truth_row,truth_col,est_row,est_col,error,located\n";
  std::vector<double> errors;
  int located = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    f << i << ',' << r.truth.row << ',' << r.truth.col << ',' << r.estimate.row << ',' << r.estimate.col << ',' << r.error
      << ',' << r.located << '\n';
    errors.push_back(r.error);
    located += r.located;
  }
  const double med = median(errors);
  write_json({{"map_id", map_id}, {"runs", runs.size()}, {"located", located}, {"median_error", std::isfinite(med) ? json(med) : json(nullptr)}},
             out / "summary.json");
  log("median localization error " + std::to_string(med));
  if (located == 0) throw NoLocalizationError("no run produced a location estimate");
  return 0;
}

template <typename T>
int cmd_coverage(const Options& o, const json& cfg) {
  check_keys(cfg, {"dataset", "checkpoint", "threshold", "split", "truth", "max_maps", "seed", "precision", "out"},
             "coverage config");
  const Dataset d = open_dataset(cfg);
  const LoadedModel<T> m = load_model<T>(required<std::string>(cfg, "checkpoint"));
  const auto& ids = split_ids(d.split, cfg.value("split", std::string("test")));
  check_split_leakage(m.train_map_ids(), ids);
  const double threshold = cfg.value("threshold", m.metadata.value("threshold", 0.5));
  const fs::path out = output_dir(o, cfg);
  const std::uint64_t seed = o.seed ? *o.seed : cfg.value("seed", std::uint64_t{0});
  auto set = build_sample_set<T>(d, ids, as_target(truth_kind(cfg)), m.input(), seed);
  const auto preds = predict_grids(m.forward(), set.set);
  std::ofstream f(out / "coverage.csv");
  f.precision(17);
  f << "id,rmse,pixel_accuracy\n";
  std::vector<CoverageMetrics> all;
  const std::size_t max_maps = cfg.value("max_maps", std::size_t{4});
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Grid gain = target_grid(set.set, i);
    const CoverageMap truth = hard_coverage(gain, threshold);
    const CoverageMetrics c = coverage_metrics(preds[i], truth);
    all.push_back(c);
    const std::string id = std::to_string(set.keys[i].map_id) + "_" + std::to_string(set.keys[i].tx_index);
    f << set.keys[i].map_id << '/' << set.keys[i].tx_index << ',' << c.rmse << ',' << c.pixel_accuracy << '\n';
    if (i < max_maps) save_pgm(compose_strip({gain, truth.grid, preds[i]}), out / ("coverage_" + id + ".pgm"));
  }
  double rm = 0;
  for (const auto& c : all) rm += c.rmse * c.rmse;
  f << "aggregate," << std::sqrt(rm / static_cast<double>(all.size())) << ',' << mean_pixel_accuracy(all) << '\n';
  return 0;
}

int cmd_bench(const Options& o) {
  const json cfg = load_config(o.config);
  check_keys(cfg, {"spec", "ns", "ks", "reps", "seed", "grid", "completion_iters", "out"}, "bench config");
  BenchOptions b;
  if (cfg.contains("spec")) b.spec = unet_spec_from_json(cfg.at("spec"));
  b.ns = cfg.value("ns", b.ns);
  b.ks = cfg.value("ks", b.ks);
  b.reps = cfg.value("reps", b.reps);
  b.seed = o.seed ? *o.seed : cfg.value("seed", b.seed);
  b.grid = cfg.value("grid", b.grid);
  b.completion_iters = cfg.value("completion_iters", b.completion_iters);
  if (b.reps < 5) throw ConfigError("bench: reps must be >= 5");
  const fs::path out = output_dir(o, cfg);
  const BenchResult r = run_bench(b);
  std::ofstream f(out / "bench.csv");
  f.precision(9);
  f << "what,size,median_seconds,flops\n";
  for (const auto& row : r.rows) f << row.what << ',' << row.size << ',' << row.seconds << ',' << row.flops << '\n';
  json ex(r.exponents);
  write_json(ex, out / "exponents.json");
  for (const auto& [k, v] : r.exponents) log(k + " exponent " + std::to_string(v));
  return 0;
}

int cmd_strip(const std::vector<std::string>& inputs, const std::string& out, int gap) {
  if (out.empty()) throw ConfigError("strip: --out is required");
  std::vector<Grid> panels;
  for (const auto& p : inputs) panels.push_back(load_pgm(p));
  save_pgm(compose_strip(panels, gap), out);
  return 0;
}

template <typename Fn>
int with_precision(const Options& o, Fn&& fn) {
  const json cfg = load_config(o.config);
  return use_double(cfg) ? fn(double{}, cfg) : fn(float{}, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radio map estimation toolkit"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--force", o.force, "Replace a non-empty output directory");
    sub->add_option("--seed", seed, "Override the config's seeds");
    return sub;
  };
  struct Entry {
    const char* name;
    const char* help;
  };
  const Entry entries[] = {{"gen-dataset", "Generate a synthetic dataset"},
                           {"train", "Train a UNet or retrospective WNet"},
                           {"adapt", "Adapt a trained UNet to sparse refined samples"},
                           {"train-coverage", "Train a coverage thresholder through the alpha curriculum"},
                           {"eval", "Evaluate a checkpoint on a dataset split"},
                           {"baseline", "NMSE versus number of measurements for the baselines"},
                           {"localize", "Level-set localization runs"},
                           {"coverage", "Coverage maps and pixel accuracy"},
                           {"bench", "Timing and scaling exponents"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& e : entries) subs[e.name] = add_common(app.add_subcommand(e.name, e.help));

  std::vector<std::string> strip_inputs;
  std::string strip_out;
  int strip_gap = 2;
  CLI::App* strip = app.add_subcommand("strip", "Compose PGM images side by side");
  strip->add_option("inputs", strip_inputs, "PGM files")->required()->check(CLI::ExistingFile);
  strip->add_option("--out", strip_out, "Output PGM")->required();
  strip->add_option("--gap", strip_gap, "Gap in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (const auto& [name, sub] : subs)
    if (sub->parsed() && sub->count("--seed")) o.seed = seed;

  try {
    if (strip->parsed()) return cmd_strip(strip_inputs, strip_out, strip_gap);
    if (subs["gen-dataset"]->parsed()) return cmd_gen_dataset(o);
    if (subs["bench"]->parsed()) return cmd_bench(o);
    auto dispatch = [&](auto tag, const json& cfg) -> int {
      using T = decltype(tag);
      if (subs["train"]->parsed()) return cmd_train<T>(o, cfg);
      if (subs["adapt"]->parsed()) return cmd_adapt<T>(o, cfg);
      if (subs["train-coverage"]->parsed()) return cmd_train_coverage<T>(o, cfg);
      if (subs["eval"]->parsed()) return cmd_eval<T>(o, cfg);
      if (subs["baseline"]->parsed()) return cmd_baseline<T>(o, cfg);
      if (subs["localize"]->parsed()) return cmd_localize<T>(o, cfg);
      return cmd_coverage<T>(o, cfg);
    };
    return with_precision(o, dispatch);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
}
