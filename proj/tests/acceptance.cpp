// Acceptance runner: prints one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "radiomap/experiments.hpp"

using namespace radiomap;
using radiomap::testing::gradcheck;
using radiomap::testing::random_tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TrainConfig train_cfg(int epochs, std::uint64_t seed = 0, FidelityMode mode = FidelityMode::FixedB) {
  TrainConfig c;
  c.lr = 1e-3;
  c.epochs = epochs;
  c.batch_size = 8;
  c.seed = seed;
  c.fidelity_mode = mode;
  return c;
}

template <typename T>
LoadedModel<T> wrap(const UNet<T>& net, const InputLayout& layout) {
  LoadedModel<T> m;
  m.kind = "unet";
  m.unet = net.clone();
  m.metadata = {{"input", to_json(layout)}};
  return m;
}

template <typename T>
ForwardFn<T> fwd(const UNet<T>& net) {
  return [&net](const Tensor<T>& x) { return net.forward(x); };
}

template <typename T>
ForwardFn<T> fwd(const WNet<T>& net) {
  return [&net](const Tensor<T>& x) { return net.forward(x); };
}

// Shared 32x32 dataset and the coarse-trained model reused by several criteria.
const InputLayout kLayoutC{true, false};
const InputLayout kLayoutS{true, true, 1, 50};

struct Shared {
  std::optional<Dataset> data;
  std::optional<UNet<float>> radiounet_c;
  double radiounet_c_seconds = 0;

  const Dataset& dataset() {
    if (!data) {
      DatasetConfig c;
      c.maps = 400;
      c.tx_per_map = 4;
      c.size = 32;
      c.seed = 100;
      c.refined_samples = 100;
      c.split = {0.6, 0.2, 0.2};
      data = generate_dataset(c);
    }
    return *data;
  }

  const UNet<float>& model_c() {
    if (!radiounet_c) {
      const auto t0 = std::chrono::steady_clock::now();
      radiounet_c = train_radiounet<float>(dataset(), UNetSpec{3, {16, 32, 64, 128}}, 1, kLayoutC, train_cfg(60, 1)).model;
      radiounet_c_seconds = seconds_since(t0);
    }
    return *radiounet_c;
  }
};

Shared shared;

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const LinkBudget lb;
  const double thr = pathloss_threshold(lb);
  const double gray = to_gray(lb, thr);
  const double lhs = lb.m1_db - thr, rhs = 4 * (thr - lb.pl_trnc_db);
  const double rule = std::abs(lhs - rhs) / rhs;
  const bool pass = std::abs(thr - -127.0) < 1e-9 && std::abs(gray - 0.20169) <= 1e-5 && rule <= 0.02;
  std::ostringstream s;
  s << "threshold " << thr << " dB, gray " << fmt("%.6f", gray) << ", design rule " << lhs << " vs " << rhs << " ("
    << fmt("%.2f", 100 * rule) << "%)";
  return {pass, s.str()};
}

Outcome criterion2() {
  using T4 = Tensor<double>;
  auto probe = [](const T4& out, std::uint64_t seed) {
    Rng r(seed);
    return sum(mul(out, random_tensor(r, out.shape(), false)));
  };
  double worst = 0;
  int checks = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const std::uint64_t p = 5000 + seed;
    T4 x = random_tensor(rng, {2, 3, 6, 6});
    T4 k = random_tensor(rng, {4, 3, 3, 3}), b = random_tensor(rng, {4});
    T4 y = random_tensor(rng, {2, 2, 6, 6});
    T4 t = random_tensor(rng, {2, 3, 6, 6}, false), w = random_tensor(rng, {2, 3, 6, 6}, false, 0, 1);
    T4 in = random_tensor(rng, {5, 4}), W = random_tensor(rng, {3, 4}), bias = random_tensor(rng, {3});
    const std::vector<double> errs{
        gradcheck({x, k, b}, [&] { return probe(conv2d(x, k, b), p); }),
        gradcheck({x, k, b}, [&] { return probe(conv2d(x, k, b, Padding::Circular), p); }),
        gradcheck({x}, [&] { return probe(relu(x), p); }),
        gradcheck({x}, [&] { return probe(sigmoid(x), p); }),
        gradcheck({x}, [&] { return probe(maxpool2(x), p); }),
        gradcheck({x}, [&] { return probe(upsample2(x), p); }),
        gradcheck({x, y}, [&] { return probe(concat_channels(x, y), p); }),
        gradcheck({x}, [&] { return probe(slice_channels(x, 1, 2), p); }),
        gradcheck({x}, [&] { return probe(reshape(x, {6, 36}), p); }),
        gradcheck({x}, [&] { return mse_loss(x, t); }),
        gradcheck({x}, [&] { return weighted_mse_loss(x, t, w); }),
        gradcheck({in, W, bias}, [&] { return probe(linear(in, W, bias), p); }),
    };
    UNet<double> net(UNetSpec{2, {2, 4}, 3, 1, Padding::Zero}, seed);
    T4 ux = random_tensor(rng, {1, 2, 4, 4});
    T4 target = random_tensor(rng, {1, 1, 4, 4}, false);
    std::vector<T4> wrt = net.parameters();
    wrt.push_back(ux);
    const double unet_err = gradcheck(wrt, [&] { return mse_loss(net.forward(ux), target); }, 1e-6, 48);
    for (double e : errs) worst = std::max(worst, e);
    worst = std::max(worst, unet_err);
    checks += static_cast<int>(errs.size()) + 1;
  }
  return {worst < 1e-4, std::to_string(checks) + " checks over 20 seeds, worst relative error " + fmt("%.2e", worst)};
}

template <typename T>
bool shift_equivariant(std::uint64_t seed) {
  Rng rng(seed);
  auto rand = [&](Shape s) {
    std::vector<T> v(numel_of(s));
    for (auto& e : v) e = static_cast<T>(uniform_real(rng, -1, 1));
    return Tensor<T>::from(std::move(s), std::move(v));
  };
  const std::size_t H = 10, W = 8;
  Tensor<T> k1 = rand({4, 2, 3, 3}), b1 = rand({4}), k2 = rand({3, 4, 3, 3}), b2 = rand({3});
  auto net = [&](const Tensor<T>& x) {
    return relu(conv2d(relu(conv2d(x, k1, b1, Padding::Circular)), k2, b2, Padding::Circular));
  };
  auto shift = [](const Tensor<T>& t, std::size_t dr, std::size_t dc) {
    const std::size_t planes = t.dim(0) * t.dim(1), h = t.dim(2), w = t.dim(3);
    std::vector<T> out(t.numel());
    for (std::size_t p = 0; p < planes; ++p)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) out[(p * h + (i + dr) % h) * w + (j + dc) % w] = t.data()[(p * h + i) * w + j];
    return Tensor<T>::from(t.shape(), std::move(out));
  };
  const Tensor<T> x = rand({2, 2, H, W});
  for (std::size_t dr = 0; dr < H; dr += 3)
    for (std::size_t dc = 0; dc < W; dc += 3) {
      const Tensor<T> a = net(shift(x, dr, dc)), b = shift(net(x), dr, dc);
      if (!std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end())) return false;
    }
  return true;
}

Outcome criterion3() {
  int ok = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ok += shift_equivariant<double>(seed);
    ok += shift_equivariant<float>(seed);
    total += 2;
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " (seed, precision) cases bit-identical"};
}

Outcome criterion4() {
  TrainConfig cfg;
  cfg.lr = 0.05;
  std::vector<Tensor<double>> ps{Tensor<double>::parameter({1}, {1.0})};
  AdamState<double> st;
  int steps = 0;
  double first_err = 0;
  while (std::abs(ps[0].data()[0]) >= 1e-3 && steps < 500) {
    ps[0].zero_grad();
    backward(mul(ps[0], ps[0]));
    const double g = 2 * ps[0].data()[0];
    adam_step(ps, st, cfg);
    if (steps == 0) first_err = std::abs(ps[0].data()[0] - (1.0 - cfg.lr * g / (std::abs(g) + cfg.eps)));
    ++steps;
  }
  const double p = std::abs(ps[0].data()[0]);
  return {p < 1e-3 && first_err <= 1e-10,
          "|p| = " + fmt("%.2e", p) + " after " + std::to_string(steps) + " steps, first-step error " + fmt("%.1e", first_err)};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  DatasetConfig c;
  c.maps = 20;
  c.tx_per_map = 1;
  c.size = 64;
  c.seed = 300;
  c.refined_samples = 0;
  Dataset d = generate_dataset(c);
  std::vector<int> all(20);
  for (int i = 0; i < 20; ++i) all[i] = i;
  d.split = {all, all, {}};
  const UNetSpec spec{2, {16, 32, 64, 128}};
  TrainConfig cfg = train_cfg(300, 3);
  cfg.batch_size = 4;
  cfg.select_on_validation = false;
  auto a = train_radiounet<float>(d, spec, 7, InputLayout{}, cfg);
  auto b = train_radiounet<float>(d, spec, 7, InputLayout{}, cfg);
  const auto set = build_sample_set<float>(d, all, TargetKind::CoarseB, InputLayout{}, 0);
  const double rmse_gray = evaluate_set<float>(fwd(a.model), set, d.config.link_budget).back().rmse_gray;
  bool identical = true;
  const auto pa = a.model.parameters(), pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    identical = identical && std::equal(pa[i].data().begin(), pa[i].data().end(), pb[i].data().begin(), pb[i].data().end());
  const double secs = seconds_since(t0);
  const long params = param_count(spec);
  std::ostringstream s;
  s << params << " params, train RMSE " << fmt("%.4f", rmse_gray) << ", runs " << (identical ? "bit-identical" : "differ")
    << ", " << fmt("%.0f", secs) << " s";
  return {params <= 500000 && rmse_gray < 0.02 && identical && secs <= 600, s.str()};
}

double free_pixel_nmse(const Grid& pred, const Grid& truth, const Grid& buildings) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (buildings.values()[i] < 0.5) {
      num += std::pow(pred.values()[i] - truth.values()[i], 2);
      den += truth.values()[i] * truth.values()[i];
    }
  return num / den;
}

Outcome criterion6() {
  const bool c_cached = shared.radiounet_c.has_value();
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset& d = shared.dataset();
  const LinkBudget& lb = d.config.link_budget;
  const UNet<float>& c_model = shared.model_c();
  const auto s_net = train_radiounet<float>(d, UNetSpec{4, {16, 32, 64}}, 2, kLayoutS, train_cfg(60, 2)).model;
  const LoadedModel<float> s_model = wrap(s_net, kLayoutS);

  SweepOptions opt;
  opt.ks = {5, 10, 20, 50};
  opt.methods = {"rbf", "tomography"};
  opt.truth = FidelityKind::CoarseB;
  opt.seed = 9;
  opt.max_pairs = 160;
  const auto& test = d.split.test_map_ids;
  const auto rows = nmse_sweep<float>(d, test, opt, &s_model);

  const auto c_rows = evaluate_set<float>(fwd(c_model), build_sample_set<float>(d, test, TargetKind::CoarseB, kLayoutC, 0), lb);
  double c_nmse = 0;
  for (std::size_t i = 0; i < opt.max_pairs; ++i) c_nmse += c_rows[i].nmse;
  c_nmse /= static_cast<double>(opt.max_pairs);

  // MLP on the held-out transmitter of the first test maps, RadioUNet_C on the same pairs.
  const std::vector<int> mlp_ids(test.begin(), test.begin() + 10);
  TrainConfig mcfg;
  mcfg.lr = 1e-3;
  mcfg.epochs = 60;
  mcfg.batch_size = 128;
  const auto mlp = mlp_baseline<float>(d, mlp_ids, FidelityKind::CoarseB, MlpSpec{}, 4, mcfg);
  double mlp_nmse = 0, c_on_mlp = 0;
  const auto c_preds = build_sample_set<float>(d, mlp_ids, TargetKind::CoarseB, kLayoutC, 0);
  const auto preds = predict_grids(fwd(c_model), c_preds.set);
  for (std::size_t i = 0; i < mlp.size(); ++i) {
    mlp_nmse += mlp[i].nmse;
    for (std::size_t j = 0; j < c_preds.keys.size(); ++j)
      if (c_preds.keys[j].map_id == mlp[i].map_id && c_preds.keys[j].tx_index == mlp[i].tx_index)
        c_on_mlp += nmse(preds[j], target_grid(c_preds.set, j));
  }
  mlp_nmse /= static_cast<double>(mlp.size());
  c_on_mlp /= static_cast<double>(mlp.size());

  bool pass = c_on_mlp < mlp_nmse;
  std::ostringstream s;
  s << "C " << fmt("%.4f", c_nmse) << ";";
  std::map<std::size_t, std::map<std::string, double>> by_k;
  for (const SweepRow& r : rows) by_k[r.k][r.method] = r.nmse;
  for (auto& [k, m] : by_k) {
    pass = pass && m["radiounet_s"] < m["rbf"] && c_nmse < m["tomography"];
    s << " k=" << k << " S " << fmt("%.4f", m["radiounet_s"]) << " rbf " << fmt("%.3f", m["rbf"]) << " tomo "
      << fmt("%.4f", m["tomography"]) << ";";
  }
  // Free-pixel RBF error for reference only.
  const auto rbf_set = sweep_set<float>(d, test, InputLayout{}, 50, opt);
  double rbf_free = 0;
  for (std::size_t i = 0; i < rbf_set.keys.size(); ++i) {
    const MapRecord& m = d.map(rbf_set.keys[i].map_id);
    const Scene scene = m.scene.with_tx(m.txs[static_cast<std::size_t>(rbf_set.keys[i].tx_index)].tx);
    rbf_free += free_pixel_nmse(rbf_interpolate(rbf_set.keys[i].measurements, scene), target_grid(rbf_set.set, i), scene.buildings);
  }
  rbf_free /= static_cast<double>(rbf_set.keys.size());
  const double secs = seconds_since(t0) + (c_cached ? shared.radiounet_c_seconds : 0.0);
  pass = pass && secs <= 1800;
  s << " rbf free-pixel k=50 " << fmt("%.4f", rbf_free) << "; MLP " << fmt("%.4f", mlp_nmse) << " vs C "
    << fmt("%.4f", c_on_mlp) << " on " << mlp.size() << " held-out tx; " << fmt("%.0f", secs) << " s";
  return {pass, s.str()};
}

double refined_nmse(const Dataset& d, const ForwardFn<float>& f, const InputLayout& layout) {
  const auto set = build_sample_set<float>(d, d.split.test_map_ids, TargetKind::Refined, layout, 0);
  return evaluate_set<float>(f, set, d.config.link_budget).back().nmse;
}

Outcome criterion7() {
  const Dataset& d = shared.dataset();
  const UNet<float>& first = shared.model_c();
  const auto adapted = train_adaptation<float>(d, first, kLayoutC, UNetSpec{4, {16, 32, 64}}, 3, train_cfg(30, 3));
  const double zero_shot = refined_nmse(d, fwd(first), kLayoutC);
  const double adapted_nmse = refined_nmse(d, fwd(adapted.model), kLayoutC);

  DatasetConfig c;
  c.maps = 120;
  c.tx_per_map = 4;
  c.size = 32;
  c.seed = 200;
  c.refined_samples = 0;
  const Dataset d7 = generate_dataset(c);
  const UNetSpec spec{2, {8, 16, 32}};
  int wins = 0;
  std::ostringstream runs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = train_radiounet<float>(d7, spec, 10 + seed, InputLayout{}, train_cfg(30, seed, FidelityMode::FixedA)).model;
    const auto ab = train_radiounet<float>(d7, spec, 10 + seed, InputLayout{}, train_cfg(30, seed, FidelityMode::RandomAB)).model;
    const double na = refined_nmse(d7, fwd(a), InputLayout{}), nab = refined_nmse(d7, fwd(ab), InputLayout{});
    wins += nab < na;
    runs << " " << fmt("%.4f", nab) << "/" << fmt("%.4f", na);
  }
  std::ostringstream s;
  s << "(a) adapted " << fmt("%.4f", adapted_nmse) << " vs zero-shot " << fmt("%.4f", zero_shot) << "; (b) randomAB/fixedA"
    << runs.str() << ", " << wins << "/5 wins";
  return {adapted_nmse < zero_shot && wins >= 3, s.str()};
}

Outcome criterion8() {
  const Dataset& d = shared.dataset();
  const LinkBudget& lb = d.config.link_budget;
  const auto small = train_radiounet<float>(d, UNetSpec{3, {8, 16}}, 4, kLayoutC, train_cfg(30, 4)).model;
  const auto retro = train_retrospective<float>(d, small, kLayoutC, UNetSpec{4, {8, 16}}, 5, train_cfg(20, 5));
  const auto test = build_sample_set<float>(d, d.split.test_map_ids, TargetKind::CoarseB, kLayoutC, 0);
  const double alone = evaluate_set<float>(fwd(small), test, lb).back().rmse_gray;
  const double wnet = evaluate_set<float>(fwd(retro.model), test, lb).back().rmse_gray;
  return {wnet < alone, "test RMSE WNet " + fmt("%.5f", wnet) + " vs first UNet " + fmt("%.5f", alone)};
}

Outcome criterion9() {
  double rbf_err = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scene scene = random_scene(seed, 32);
    const Grid gain = simulate(scene, Fidelity::of(FidelityKind::CoarseB), LinkBudget{});
    Rng rng(seed + 7);
    const auto s = sample_measurements(gain, scene, 40, rng);
    const Grid g = rbf_interpolate(s, scene);
    for (std::size_t i = 0; i < s.count(); ++i) rbf_err = std::max(rbf_err, std::abs(g[s.locations[i]] - s.values[i]));
  }

  double worst_completion = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(40 + seed);
    Eigen::MatrixXd u(8, 2), v(8, 2);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = uniform_real(rng, -1, 1), v.data()[i] = uniform_real(rng, -1, 1);
    const Eigen::MatrixXd m = u * v.transpose();
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(8, 8);
    for (std::size_t i : sample_without_replacement(rng, 64, 26))
      mask(static_cast<Eigen::Index>(i % 8), static_cast<Eigen::Index>(i / 8)) = 1;
    CompletionOptions opt;
    opt.tau = 1e-3;
    opt.iters = 20000;
    opt.tol = 1e-10;
    const auto res = svt_complete(m, mask, opt);
    worst_completion = std::max(worst_completion, (res.matrix - m).norm() / m.norm());
  }

  double tomo_err = 0;
  const LinkBudget lb;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scene scene = random_scene(20 + seed, 32);
    const Grid truth = tomography_predict(scene, scene.tx, {2.0, 1}, lb);
    Rng rng(seed);
    const auto fit = tomography_fit(scene, scene.tx, sample_measurements(truth, scene, 60, rng), lb);
    tomo_err = std::max(tomo_err, std::abs(fit.model.slf_value - 2.0) / 2.0);
  }
  const bool a = rbf_err <= 1e-8, b = worst_completion < 1e-2, c = tomo_err <= 0.01;
  std::ostringstream s;
  s << "(a) RBF max sample error " << fmt("%.1e", rbf_err) << (a ? " ok" : " FAIL") << "; (b) rank-2 8x8 from 26/64 entries, worst rel error "
    << fmt("%.3f", worst_completion) << (b ? " ok" : " FAIL") << "; (c) tomography f=2 worst rel error " << fmt("%.2e", tomo_err)
    << (c ? " ok" : " FAIL");
  return {a && b && c, s.str()};
}

Outcome criterion10() {
  const Dataset& d = shared.dataset();
  const LinkBudget& lb = d.config.link_budget;
  const Fidelity fid = Fidelity::of(FidelityKind::CoarseB);
  LocalizationSetup cfg;
  cfg.runs = 50;
  cfg.seed = 21;
  const int map_id = d.split.test_map_ids.front();
  const Scene scene = d.map(map_id).scene;
  const auto exact = localization_runs(scene, fid, lb, [&](const Scene& s) { return simulate(s, fid, lb); }, cfg);
  int within = 0;
  for (const auto& r : exact) within += r.located && r.error <= 1.0;

  const LoadedModel<float> model = wrap(shared.model_c(), kLayoutC);
  const auto trained = localization_runs(scene, fid, lb, model_map_fn(model), cfg);
  std::vector<double> errors;
  for (const auto& r : trained) errors.push_back(r.error);
  const double med = median(errors);
  std::vector<double> exact_errors;
  for (const auto& r : exact) exact_errors.push_back(r.error);
  std::ostringstream s;
  s << "exact maps " << within << "/50 within 1 m (max " << fmt("%.2f", *std::max_element(exact_errors.begin(), exact_errors.end()))
    << " m); trained maps median " << fmt("%.2f", med) << " m";
  return {within == 50 && med <= 3.0, s.str()};
}

Outcome criterion11() {
  const Dataset& d = shared.dataset();
  const double threshold = 0.5;
  const std::vector<double> alphas = default_alpha_schedule();
  const int epochs_per_stage = 4;
  const UNet<float>& first = shared.model_c();
  const auto curriculum =
      train_coverage<float>(d, first, kLayoutC, UNetSpec{4, {8, 16, 32}}, 6, threshold, alphas, train_cfg(epochs_per_stage, 6));

  const int budget = epochs_per_stage * static_cast<int>(alphas.size());
  const auto gains_train = build_sample_set<float>(d, d.split.train_map_ids, TargetKind::CoarseB, kLayoutC, 0);
  const auto gains_val = build_sample_set<float>(d, d.split.val_map_ids, TargetKind::CoarseB, kLayoutC, 0);
  UNet<float> direct(UNetSpec{3, {8, 16, 32}}, 6);
  const ForwardFn<float> direct_fwd = [&direct](const Tensor<float>& x) { return sigmoid(direct.forward(x)); };
  train_loop<float>(direct.parameters(), direct_fwd, hard_targets(gains_train.set, threshold), hard_targets(gains_val.set, threshold),
                    train_cfg(budget, 6));

  const auto test = build_sample_set<float>(d, d.split.test_map_ids, TargetKind::CoarseB, kLayoutC, 0);
  const double acc_curriculum = mean_pixel_accuracy(evaluate_coverage(fwd(curriculum.model), test, threshold));
  const double acc_direct = mean_pixel_accuracy(evaluate_coverage(direct_fwd, test, threshold));
  return {acc_curriculum > acc_direct, "pixel accuracy curriculum " + fmt("%.4f", acc_curriculum) + " vs direct hard targets " +
                                           fmt("%.4f", acc_direct) + " (" + std::to_string(budget) + " epochs each)"};
}

Outcome criterion12() {
  BenchOptions opt;
  opt.ns = {32, 64, 128};
  opt.ks = {32, 64};
  opt.reps = 5;
  opt.completion_iters = 2;
  opt.grid = 32;
  const BenchResult r = run_bench(opt);
  const double e = r.exponents.at("unet_inference_n");
  bool exact = true;
  for (int n : {32, 64}) exact = exact && forward_flops(opt.spec, 2 * n) == 4 * forward_flops(opt.spec, n);
  return {e >= 1.7 && e <= 2.5 && exact,
          "inference exponent " + fmt("%.3f", e) + ", FLOPs per doubling " + (exact ? "x4 exactly" : "not x4")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2,  criterion3,  criterion4,
                                                       criterion5, criterion6,  criterion7,  criterion8,
                                                       criterion9, criterion10, criterion11, criterion12};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failed = 0;
  for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
    if (!selected.empty() && !selected.count(i)) continue;
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s %s\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
