#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <string>
#include <vector>

#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/random.hpp"

namespace radiomap {

// ---------------------------------------------------------------------------
// Coverage maps.

struct CoverageMap {
  Grid grid;  // 1 where gain > threshold, else 0
  double threshold = 0;
};

inline CoverageMap hard_coverage(const Grid& gain, double threshold) {
  if (!(threshold > 0 && threshold < 1)) throw ConfigError("coverage threshold must lie in (0, 1)");
  CoverageMap m{Grid(gain.height(), gain.width()), threshold};
  for (std::size_t i = 0; i < gain.size(); ++i) m.grid.values()[i] = gain.values()[i] > threshold ? 1.0 : 0.0;
  return m;
}

/// sigmoid(alpha * (value - threshold)), overflow-safe for large alpha.
inline double soft_coverage_value(double value, double threshold, double alpha) {
  const double z = alpha * (value - threshold);
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline Grid soft_coverage(const Grid& gain, double threshold, double alpha) {
  if (!(alpha > 0)) throw ConfigError("soft coverage needs alpha > 0");
  Grid out(gain.height(), gain.width());
  for (std::size_t i = 0; i < gain.size(); ++i) out.values()[i] = soft_coverage_value(gain.values()[i], threshold, alpha);
  return out;
}

struct CoverageMetrics {
  double rmse = 0;
  double pixel_accuracy = 0;
};

/// `pred` is a probability map; accuracy thresholds it at 0.5.
inline CoverageMetrics coverage_metrics(const Grid& pred, const CoverageMap& truth) {
  if (!pred.same_shape(truth.grid)) throw DataError("coverage_metrics: shape mismatch");
  if (pred.size() == 0) throw DataError("coverage_metrics: empty grid");
  double se = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred.values()[i], t = truth.grid.values()[i];
    se += (p - t) * (p - t);
    hits += ((p > 0.5) == (t > 0.5));
  }
  const double n = static_cast<double>(pred.size());
  return {std::sqrt(se / n), static_cast<double>(hits) / n};
}

// ---------------------------------------------------------------------------
// Level-set localization.

/// Non-building pixels whose map value lies within eps of the report.
inline std::vector<Pixel> level_set(const Grid& map, const Grid& buildings, double report, double eps) {
  if (!(eps > 0)) throw ConfigError("level_set: eps must be > 0");
  if (!map.same_shape(buildings)) throw DataError("level_set: map and building mask differ in shape");
  std::vector<Pixel> out;
  for (int r = 0; r < map.height(); ++r)
    for (int c = 0; c < map.width(); ++c)
      if (buildings(r, c) == 0 && std::abs(map(r, c) - report) <= eps) out.push_back({r, c});
  return out;
}

struct PointEstimate {
  double row = 0;
  double col = 0;
};

inline double distance(PointEstimate a, Pixel b) { return std::hypot(a.row - b.row, a.col - b.col); }

/// Centroid and mean squared distance to it. Empty input gives NaN.
inline std::pair<PointEstimate, double> centroid_and_variance(const std::vector<Pixel>& set) {
  if (set.empty()) return {{NAN, NAN}, NAN};
  double sr = 0, sc = 0;
  for (Pixel p : set) sr += p.row, sc += p.col;
  const double n = static_cast<double>(set.size());
  PointEstimate c{sr / n, sc / n};
  double v = 0;
  for (Pixel p : set) v += (p.row - c.row) * (p.row - c.row) + (p.col - c.col) * (p.col - c.col);
  return {c, v / n};
}

struct LocalizationProblem {
  std::vector<Grid> maps;       // estimated radio maps, one per transmitter
  std::vector<double> reports;  // gray level reported for each map
  Grid buildings;
  double eps_min = 0.01;  // per-map eps drawn uniformly from [eps_min, eps_max]
  double eps_max = 0.05;
  int subset_size = 5;  // J
  int trials = 5;       // R
  std::uint64_t seed = 0;
};

struct LocalizationTrial {
  std::vector<int> maps;  // indices into the problem's maps
  std::vector<double> eps;
  std::size_t set_size = 0;
  PointEstimate centroid{NAN, NAN};
  double variance = NAN;
};

struct LocalizationResult {
  PointEstimate estimate;
  double variance = 0;
  int chosen_trial = -1;
  std::vector<int> dropped_reports;  // zero reports, excluded from K
  std::vector<LocalizationTrial> trials;
};

/// Every trial produced an empty intersection.
struct NoLocalizationError : DataError {
  using DataError::DataError;
};

inline LocalizationResult localize(const LocalizationProblem& p) {
  if (p.maps.size() != p.reports.size()) throw ConfigError("localize: need one report per map");
  if (p.subset_size < 1 || p.trials < 1) throw ConfigError("localize: J and R must be >= 1");
  if (static_cast<std::size_t>(p.subset_size) > p.maps.size()) throw ConfigError("localize: J exceeds K");
  if (!(p.eps_min > 0) || p.eps_max < p.eps_min) throw ConfigError("localize: need 0 < eps_min <= eps_max");
  for (const Grid& m : p.maps)
    if (!m.same_shape(p.buildings)) throw DataError("localize: map shape differs from building mask");

  LocalizationResult res;
  std::vector<int> usable;
  for (std::size_t k = 0; k < p.maps.size(); ++k) {
    if (p.reports[k] > 0)
      usable.push_back(static_cast<int>(k));
    else
      res.dropped_reports.push_back(static_cast<int>(k));
  }
  if (usable.size() < static_cast<std::size_t>(p.subset_size))
    throw NoLocalizationError("localize: only " + std::to_string(usable.size()) + " non-zero reports for J = " +
                              std::to_string(p.subset_size));

  const int H = p.buildings.height(), W = p.buildings.width();
  Rng rng(p.seed);
  for (int t = 0; t < p.trials; ++t) {
    LocalizationTrial trial;
    for (std::size_t i : sample_without_replacement(rng, usable.size(), static_cast<std::size_t>(p.subset_size))) {
      trial.maps.push_back(usable[i]);
      trial.eps.push_back(uniform_real(rng, p.eps_min, p.eps_max));
    }
    std::vector<Pixel> set;
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        if (p.buildings(r, c) != 0) continue;
        bool in = true;
        for (std::size_t j = 0; j < trial.maps.size() && in; ++j)
          in = std::abs(p.maps[trial.maps[j]](r, c) - p.reports[trial.maps[j]]) <= trial.eps[j];
        if (in) set.push_back({r, c});
      }
    trial.set_size = set.size();
    std::tie(trial.centroid, trial.variance) = centroid_and_variance(set);
    if (!set.empty() && (res.chosen_trial < 0 || trial.variance < res.variance)) {
      res.chosen_trial = t;
      res.variance = trial.variance;
      res.estimate = trial.centroid;
    }
    res.trials.push_back(std::move(trial));
  }
  if (res.chosen_trial < 0)
    throw NoLocalizationError("no localization: all " + std::to_string(p.trials) + " trials gave empty intersections");
  return res;
}

}  // namespace radiomap
