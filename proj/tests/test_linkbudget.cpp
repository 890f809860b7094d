#include <gtest/gtest.h>

#include <cmath>

#include "radiomap/linkbudget.hpp"
#include "radiomap/random.hpp"

using namespace radiomap;

TEST(LinkBudget, NoiseFloor) {
  LinkBudget lb;
  EXPECT_NEAR(noise_floor_dbm(lb), -104.0, 1e-12);
  lb.nf_db = 3;
  EXPECT_NEAR(noise_floor_dbm(lb), -101.0, 1e-12);
  LinkBudget unit{23, 0, 1, 0};
  EXPECT_EQ(noise_floor_dbm(unit), 0.0);
  LinkBudget bad;
  bad.bandwidth_hz = 0;
  EXPECT_THROW(noise_floor_dbm(bad), ConfigError);
}

TEST(LinkBudget, PathlossThreshold) {
  LinkBudget lb;
  EXPECT_NEAR(pathloss_threshold(lb, 0), -127.0, 1e-12);
  EXPECT_NEAR(pathloss_threshold(lb, 10), -117.0, 1e-12);
  EXPECT_NEAR(pathloss_threshold(lb, lb.p_tx_dbm - noise_floor_dbm(lb)), 0.0, 1e-12);
}

TEST(LinkBudget, DesignRules) {
  LinkBudget lb;
  const double thr = pathloss_threshold(lb, 0);
  EXPECT_LT(lb.pl_trnc_db, thr);
  EXPECT_LT(thr, lb.m1_db);
  const double upper = lb.m1_db - thr, lower = 4 * (thr - lb.pl_trnc_db);
  EXPECT_NEAR(upper, 79.16, 1e-9);
  EXPECT_NEAR(lower, 80.0, 1e-9);
  EXPECT_LE(std::abs(upper - lower) / lower, 0.02);
}

TEST(LinkBudget, GrayConversion) {
  LinkBudget lb;
  EXPECT_EQ(to_gray(lb, -147), 0.0);
  EXPECT_NEAR(to_gray(lb, -47.84), 1.0, 1e-15);
  EXPECT_NEAR(to_gray(lb, -127), 20.0 / 99.16, 1e-15);
  EXPECT_NEAR(to_gray(lb, -127), 0.20169, 1e-5);
  EXPECT_EQ(to_gray(lb, -200), 0.0);
  EXPECT_THROW(from_gray(lb, 0.0), std::domain_error);
  EXPECT_THROW(from_gray(lb, -0.1), std::domain_error);
}

TEST(LinkBudget, GrayMonotoneAndInvertible) {
  LinkBudget lb;
  Rng rng(3);
  double prev_pl = -250, prev_g = to_gray(lb, prev_pl);
  for (int i = 0; i < 2000; ++i) {
    double pl = prev_pl + uniform01(rng) * 0.2;
    double g = to_gray(lb, pl);
    EXPECT_GE(g, prev_g);
    if (pl > lb.pl_trnc_db && pl <= lb.m1_db) EXPECT_NEAR(from_gray(lb, g), pl, 1e-12);
    if (pl <= lb.pl_trnc_db) EXPECT_EQ(g, 0.0);
    prev_pl = pl, prev_g = g;
  }
}

TEST(LinkBudget, ScaleConstant) {
  LinkBudget lb;
  EXPECT_NEAR(scale_db_per_gray(lb), 99.16, 1e-12);
  EXPECT_EQ(lb.reported_scale_db, 80.0);
  LinkBudget unit;
  unit.m1_db = 0;
  unit.pl_trnc_db = -100;
  EXPECT_EQ(scale_db_per_gray(unit), 100.0);
  EXPECT_NEAR(scale_db_per_gray(lb) * 0.01, 0.9916, 1e-12);
}

TEST(Metrics, NmseAndRmse) {
  Grid ref(1, 2, std::vector<double>{1, 0}), est(1, 2, std::vector<double>{0.5, 0.5});
  EXPECT_DOUBLE_EQ(nmse(est, ref), 0.5);
  EXPECT_DOUBLE_EQ(rmse(est, ref), 0.5);
  EXPECT_EQ(nmse(ref, ref), 0.0);
  EXPECT_EQ(rmse(ref, ref), 0.0);
  EXPECT_DOUBLE_EQ(nmse(Grid(1, 2), ref), 1.0);
  EXPECT_THROW(nmse(Grid(2, 1), ref), DataError);
  EXPECT_THROW(nmse(ref, Grid(1, 2)), DataError);
  Metric m = evaluate(LinkBudget{}, est, ref);
  EXPECT_DOUBLE_EQ(m.rmse_db, 99.16 * m.rmse_gray);
}

TEST(Metrics, NmseQuadraticHomogeneity) {
  Rng rng(5);
  Grid ref(8, 8), err(8, 8);
  for (double& v : ref.values()) v = uniform01(rng);
  for (double& v : err.values()) v = uniform01(rng) - 0.5;
  auto at = [&](double a) {
    Grid est = ref;
    for (std::size_t i = 0; i < est.size(); ++i) est.values()[i] += a * err.values()[i];
    return nmse(est, ref);
  };
  EXPECT_NEAR(at(3.0), 9.0 * at(1.0), 1e-12);
  EXPECT_NEAR(at(0.5), 0.25 * at(1.0), 1e-12);
}

TEST(Outage, Values) {
  LinkBudget lb;
  const double rate = 1.0;  // (2^1 - 1)_dB = 0
  const double sigma = 4.0;
  // Numerator zero: pl = noise floor - P_tx.
  const double pl0 = noise_floor_dbm(lb) - lb.p_tx_dbm;
  EXPECT_NEAR(outage_probability(lb, rate, pl0, sigma), 0.5, 1e-12);
  EXPECT_NEAR(outage_probability(lb, rate, pl0 + sigma, sigma), 0.15865525393145707, 1e-9);
  EXPECT_LT(outage_probability(lb, 1e-9, -60, sigma), 1e-9);
  EXPECT_THROW(outage_probability(lb, rate, -60, 0), ConfigError);
  EXPECT_THROW(outage_probability(lb, 0, -60, 1), ConfigError);
}

TEST(Outage, Monotonicity) {
  LinkBudget lb;
  double prev = 0;
  for (double r = 0.1; r < 10; r += 0.1) {
    double p = outage_probability(lb, r, -110, 6);
    EXPECT_GE(p, prev);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
  prev = 1;
  for (double pl = -160; pl < -60; pl += 1) {
    double p = outage_probability(lb, 2, pl, 6);
    EXPECT_LE(p, prev);
    prev = p;
  }
}
