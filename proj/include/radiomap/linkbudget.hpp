#pragma once

#include <cmath>
#include <string>

#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"

namespace radiomap {

/// System constants of the link budget, all in dB units.
struct LinkBudget {
  double p_tx_dbm = 23.0;
  double n0_dbm_per_hz = -174.0;
  double bandwidth_hz = 1e7;
  double nf_db = 0.0;
  double m1_db = -47.84;       // maximal pathloss (1 m^2 pixel at the transmitter)
  double pl_trnc_db = -147.0;  // analytic noise floor; gray level 0
  // Scaling constant quoted alongside the gray conversion. Kept for reference;
  // conversions use scale_db_per_gray().
  double reported_scale_db = 80.0;
};

/// Thermal noise power over the band: 10 log10(W) + N0 + NF.
inline double noise_floor_dbm(const LinkBudget& lb) {
  if (!(lb.bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  return 10.0 * std::log10(lb.bandwidth_hz) + lb.n0_dbm_per_hz + lb.nf_db;
}

/// Smallest pathloss at which the received SNR reaches snr_thr_db.
inline double pathloss_threshold(const LinkBudget& lb, double snr_thr_db = 0.0) {
  return -lb.p_tx_dbm + snr_thr_db + noise_floor_dbm(lb);
}

inline double scale_db_per_gray(const LinkBudget& lb) { return lb.m1_db - lb.pl_trnc_db; }

/// Affine map of pathloss onto [0, 1]; everything at or below the analytic
/// noise floor becomes 0.
inline double to_gray(const LinkBudget& lb, double pl_db) {
  return std::max((pl_db - lb.pl_trnc_db) / scale_db_per_gray(lb), 0.0);
}

inline double from_gray(const LinkBudget& lb, double gray) {
  if (!(gray > 0.0)) throw std::domain_error("from_gray: gray level must be > 0 (truncated region)");
  return lb.pl_trnc_db + gray * scale_db_per_gray(lb);
}

/// Standard Gaussian tail Q(x).
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Information outage probability at spectral efficiency `rate` when the
/// pathloss estimate carries a log-normal error of sigma_db.
inline double outage_probability(const LinkBudget& lb, double rate_bits_per_s_per_hz, double pl_db,
                                 double sigma_db) {
  if (!(sigma_db > 0.0)) throw ConfigError("sigma_db must be positive");
  if (!(rate_bits_per_s_per_hz > 0.0)) throw ConfigError("rate must be positive");
  const double snr_req_db = 10.0 * std::log10(std::exp2(rate_bits_per_s_per_hz) - 1.0);
  const double numerator = snr_req_db + noise_floor_dbm(lb) - lb.p_tx_dbm - pl_db;
  return 1.0 - gaussian_q(numerator / sigma_db);
}

struct Metric {
  double nmse = 0.0;
  double rmse_gray = 0.0;
  double rmse_db = 0.0;
};

inline void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b))
    throw DataError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                    std::to_string(b.width()));
}

inline double squared_error(const Grid& est, const Grid& ref) {
  require_same_shape(est, ref, "squared_error");
  double s = 0.0;
  auto e = est.values(), r = ref.values();
  for (std::size_t i = 0; i < e.size(); ++i) s += (e[i] - r[i]) * (e[i] - r[i]);
  return s;
}

/// Squared error normalised by the energy of the reference map.
inline double nmse(const Grid& est, const Grid& ref) {
  const double num = squared_error(est, ref);
  double den = 0.0;
  for (double v : ref.values()) den += v * v;
  if (den == 0.0) throw DataError("nmse: reference map is identically zero");
  return num / den;
}

inline double rmse(const Grid& est, const Grid& ref) {
  const double num = squared_error(est, ref);
  if (ref.size() == 0) return 0.0;
  return std::sqrt(num / static_cast<double>(ref.size()));
}

inline Metric evaluate(const LinkBudget& lb, const Grid& est, const Grid& ref) {
  Metric m;
  m.nmse = nmse(est, ref);
  m.rmse_gray = rmse(est, ref);
  m.rmse_db = scale_db_per_gray(lb) * m.rmse_gray;
  return m;
}

}  // namespace radiomap
