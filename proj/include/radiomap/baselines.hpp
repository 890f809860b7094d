#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/linkbudget.hpp"
#include "radiomap/models.hpp"
#include "radiomap/simulator.hpp"
#include "radiomap/training.hpp"

namespace radiomap {

// ---------------------------------------------------------------------------
// Multiquadric RBF interpolation.

inline double multiquadric(double r, double c) { return std::sqrt(r * r + c * c); }

/// Mean distance from each point to its nearest neighbour; 1 for a single point.
inline double mean_nearest_neighbor(const std::vector<Pixel>& pts) {
  if (pts.size() < 2) return 1.0;
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) best = std::min(best, distance(pts[i], pts[j]));
    total += best;
  }
  return total / static_cast<double>(pts.size());
}

/// Coefficients w solving Phi w = values with Phi_ij = phi(|p_i - p_j|).
inline Eigen::VectorXd rbf_weights(const std::vector<Pixel>& pts, const std::vector<double>& values, double c) {
  const auto k = static_cast<Eigen::Index>(pts.size());
  if (k == 0) throw DataError("rbf: need at least one sample");
  if (values.size() != pts.size()) throw DataError("rbf: one value per sample location required");
  if (!(c > 0)) throw ConfigError("rbf: shape parameter must be > 0");
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i] == pts[j])
        throw NumericError("rbf: singular system, duplicate sample at (" + std::to_string(pts[i].row) + ", " +
                           std::to_string(pts[i].col) + ")");
  Eigen::MatrixXd phi(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    rhs(i) = values[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j)
      phi(i, j) = multiquadric(distance(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]), c);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(phi);
  if (!lu.isInvertible()) throw NumericError("rbf: singular interpolation matrix");
  return lu.solve(rhs);
}

/// Interpolated map with building pixels set to zero. c <= 0 selects the mean
/// nearest-neighbour sample distance.
inline Grid rbf_interpolate(const SparseSamples& s, const Scene& scene, double c = 0) {
  if (c <= 0) c = mean_nearest_neighbor(s.locations);
  const Eigen::VectorXd w = rbf_weights(s.locations, s.values, c);
  const int H = scene.buildings.height(), W = scene.buildings.width();
  Grid out(H, W);
  for (int r = 0; r < H; ++r)
    for (int col = 0; col < W; ++col) {
      if (scene.is_building({r, col})) continue;
      double v = 0;
      for (std::size_t i = 0; i < s.count(); ++i)
        v += w(static_cast<Eigen::Index>(i)) * multiquadric(distance(s.locations[i], {r, col}), c);
      out(r, col) = v;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix completion by proximal gradient with singular value soft-thresholding.

struct CompletionOptions {
  double tau = 0;  // <= 0: 0.1 * largest singular value of the zero-filled matrix
  double step = 1.0;
  int iters = 500;
  double tol = 1e-6;
};

struct CompletionResult {
  Eigen::MatrixXd matrix;
  double tau = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective;  // before the first step, then after each
};

inline double nuclear_norm(const Eigen::MatrixXd& x) { return Eigen::BDCSVD<Eigen::MatrixXd>(x).singularValues().sum(); }

/// 0.5 * ||mask .* (x - observed)||^2 + tau * ||x||_*.
inline double completion_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& observed,
                                   const Eigen::MatrixXd& mask, double tau) {
  return 0.5 * (mask.cwiseProduct(x - observed)).squaredNorm() + tau * nuclear_norm(x);
}

inline Eigen::MatrixXd shrink_singular_values(const Eigen::MatrixXd& x, double t) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = (svd.singularValues().array() - t).max(0.0).matrix();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

/// `mask` holds 1 at observed entries and 0 elsewhere.
inline CompletionResult svt_complete(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& mask,
                                     const CompletionOptions& opt = {}) {
  if (observed.rows() != mask.rows() || observed.cols() != mask.cols())
    throw DataError("matrix completion: mask and observation shapes differ");
  if (mask.sum() < 1) throw DataError("matrix completion: no observed entries");
  if (!(opt.step > 0 && opt.step <= 1)) throw ConfigError("matrix completion: step must lie in (0, 1]");
  if (opt.iters < 1) throw ConfigError("matrix completion: iters must be >= 1");
  const Eigen::MatrixXd m = mask.cwiseProduct(observed);
  CompletionResult res;
  res.tau = opt.tau > 0 ? opt.tau : 0.1 * Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues()(0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(observed.rows(), observed.cols());
  res.objective.push_back(completion_objective(x, m, mask, res.tau));
  for (int it = 1; it <= opt.iters; ++it) {
    Eigen::MatrixXd next = shrink_singular_values(x - opt.step * mask.cwiseProduct(x - m), opt.step * res.tau);
    const double delta = (next - x).norm();
    x = std::move(next);
    res.objective.push_back(completion_objective(x, m, mask, res.tau));
    res.iterations = it;
    if (delta < opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.matrix = std::move(x);
  return res;
}

struct CompletionMap {
  Grid map;
  CompletionResult detail;
};

/// Completes the radio map from sparse samples; building pixels are zeroed.
inline CompletionMap matrix_complete(const SparseSamples& s, const Scene& scene, const CompletionOptions& opt = {}) {
  const int H = scene.buildings.height(), W = scene.buildings.width();
  Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(H, W), mask = Eigen::MatrixXd::Zero(H, W);
  for (std::size_t i = 0; i < s.count(); ++i) {
    obs(s.locations[i].row, s.locations[i].col) = s.values[i];
    mask(s.locations[i].row, s.locations[i].col) = 1;
  }
  CompletionMap out{Grid(H, W), svt_complete(obs, mask, opt)};
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      if (!scene.is_building({r, c})) out.map(r, c) = out.detail.matrix(r, c);
  return out;
}

// ---------------------------------------------------------------------------
// Building-loss tomography.

struct TomographyModel {
  double slf_value = 2.0;  // dB lost per building pixel crossed
  int oval_width = 1;      // odd; 1 is the bare segment
};

/// Building pixels crossed between a and b, averaged over `width` parallel
/// segments offset perpendicular to a -> b (endpoints clamped to the grid).
inline double oval_crossings(const Scene& scene, Pixel a, Pixel b, int width) {
  if (width < 1 || width % 2 == 0) throw ConfigError("tomography: oval width must be odd and >= 1");
  if (width == 1 || a == b) return segment_obstruction(scene, a, b, false).building_pixels;
  const double len = distance(a, b);
  const double pr = -(b.col - a.col) / len, pc = (b.row - a.row) / len;
  const int H = scene.buildings.height(), W = scene.buildings.width();
  auto shift = [&](Pixel p, int o) {
    return Pixel{std::clamp(p.row + static_cast<int>(std::lround(o * pr)), 0, H - 1),
                 std::clamp(p.col + static_cast<int>(std::lround(o * pc)), 0, W - 1)};
  };
  double total = 0;
  for (int o = -(width / 2); o <= width / 2; ++o)
    total += segment_obstruction(scene, shift(a, o), shift(b, o), false).building_pixels;
  return total / width;
}

inline void validate(const TomographyModel& m) {
  if (!(m.slf_value >= 0) || !std::isfinite(m.slf_value)) throw ConfigError("tomography: f must be finite and >= 0");
  if (m.oval_width < 1 || m.oval_width % 2 == 0) throw ConfigError("tomography: oval width must be odd and >= 1");
}

/// Gray-level prediction for transmitter `tx`: free-space loss minus f per
/// building pixel crossed.
inline Grid tomography_predict(const Scene& scene, Pixel tx, const TomographyModel& m, const LinkBudget& lb) {
  validate(m);
  const int H = scene.buildings.height(), W = scene.buildings.width();
  Grid out(H, W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      const Pixel y{r, c};
      out(r, c) =
          to_gray(lb, free_space_pl_db(distance(tx, y), lb.m1_db) - m.slf_value * oval_crossings(scene, tx, y, m.oval_width));
    }
  return out;
}

struct TomographyFit {
  TomographyModel model;
  bool identifiable = true;
  double residual = 0;  // sum of squared gray errors at the fitted f
  double residual_at_min = 0;
  double residual_at_max = 0;
};

/// Least-squares f on [0, f_max] by golden-section search.
inline TomographyFit tomography_fit(const Scene& scene, Pixel tx, const SparseSamples& s, const LinkBudget& lb,
                                    int oval_width = 1, double f_max = 20, double tol = 1e-4) {
  if (s.count() == 0) throw DataError("tomography fit: no samples");
  std::vector<double> fs, crossings;
  bool any = false;
  for (Pixel p : s.locations) {
    fs.push_back(free_space_pl_db(distance(tx, p), lb.m1_db));
    crossings.push_back(oval_crossings(scene, tx, p, oval_width));
    any = any || crossings.back() > 0;
  }
  auto residual = [&](double f) {
    double e = 0;
    for (std::size_t i = 0; i < s.count(); ++i) {
      const double d = to_gray(lb, fs[i] - f * crossings[i]) - s.values[i];
      e += d * d;
    }
    return e;
  };
  TomographyFit fit;
  fit.model.oval_width = oval_width;
  fit.residual_at_min = residual(0);
  fit.residual_at_max = residual(f_max);
  if (!any) {
    fit.identifiable = false;
    fit.model.slf_value = 0;
    fit.residual = fit.residual_at_min;
    return fit;
  }
  const double g = (std::sqrt(5.0) - 1) / 2;
  double a = 0, b = f_max, x1 = b - g * (b - a), x2 = a + g * (b - a);
  double r1 = residual(x1), r2 = residual(x2);
  while (b - a > tol) {
    if (r1 <= r2) {
      b = x2, x2 = x1, r2 = r1;
      x1 = b - g * (b - a), r1 = residual(x1);
    } else {
      a = x1, x1 = x2, r1 = r2;
      x2 = a + g * (b - a), r2 = residual(x2);
    }
  }
  double f = (a + b) / 2, r = residual(f);
  // Golden section assumes unimodality; never return worse than an endpoint.
  if (fit.residual_at_min < r) f = 0, r = fit.residual_at_min;
  if (fit.residual_at_max < r) f = f_max, r = fit.residual_at_max;
  fit.model.slf_value = f;
  fit.residual = r;
  return fit;
}

// ---------------------------------------------------------------------------
// Coordinate MLP baseline on a single scene.

struct TxSplit {
  std::vector<int> train, val, test;
};

/// One transmitter's dense map on the shared scene.
struct TxMap {
  Pixel tx;
  Grid gain;
};

/// One row per (tx, rx) pair as a (4, 1, 1) sample.
template <typename T>
SampleSet<T> mlp_rows(const std::vector<TxMap>& maps, const std::vector<int>& which, int grid_size) {
  SampleSet<T> s;
  s.channels = kMlpInputs;
  s.height = s.width = 1;
  for (int i : which) {
    const TxMap& m = maps.at(static_cast<std::size_t>(i));
    for (int r = 0; r < grid_size; ++r)
      for (int c = 0; c < grid_size; ++c) {
        auto f = mlp_features<T>(m.tx, {r, c}, grid_size);
        s.add({f.begin(), f.end()}, {static_cast<T>(m.gain(r, c))});
      }
  }
  return s;
}

template <typename T>
ForwardFn<T> mlp_row_forward(const Mlp<T>& model) {
  return [&model](const Tensor<T>& x) {
    const std::size_t n = x.dim(0);
    return reshape(model.forward(reshape(x, {n, std::size_t(kMlpInputs)})), {n, 1, 1, 1});
  };
}

/// Fits the MLP on all pixels of the training transmitters; cfg.batch_size
/// counts rows.
template <typename T>
TrainResult train_mlp_baseline(Mlp<T>& model, const std::vector<TxMap>& maps, const TxSplit& split,
                               const TrainConfig& cfg) {
  if (split.train.empty() || split.val.empty()) throw DataError("mlp baseline: empty train or validation split");
  if (maps.empty()) throw DataError("mlp baseline: no transmitter maps");
  const int n = maps.front().gain.height();
  for (const auto& m : maps)
    if (m.gain.height() != n || m.gain.width() != n) throw DataError("mlp baseline: maps must be square and equal-sized");
  return train_loop<T>(model.parameters(), mlp_row_forward(model), mlp_rows<T>(maps, split.train, n),
                       mlp_rows<T>(maps, split.val, n), cfg);
}

}  // namespace radiomap
