#include <gtest/gtest.h>

#include <cstdlib>

#include "radiomap/simulator.hpp"

using namespace radiomap;

namespace {

Scene empty_scene(int size, Pixel tx) {
  Scene s;
  s.buildings = Grid(size, size);
  s.cars = Grid(size, size);
  s.tx = tx;
  return s;
}

void add_block(Scene& s, int r0, int c0, int h, int w) {
  for (int r = r0; r < r0 + h; ++r)
    for (int c = c0; c < c0 + w; ++c) s.buildings(r, c) = 1.0;
}

// Oracle: does the open segment between cell centres a and b meet the open
// interior of cell p? Liang-Barsky clipping against the open square.
bool segment_hits_cell(Pixel a, Pixel b, Pixel p) {
  const double x0 = a.col, y0 = a.row, dx = b.col - a.col, dy = b.row - a.row;
  double t0 = 0.0, t1 = 1.0;
  auto clip = [&](double q0, double d, double lo, double hi) {
    if (d == 0.0) return q0 > lo && q0 < hi;
    double ta = (lo - q0) / d, tb = (hi - q0) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return true;
  };
  if (!clip(x0, dx, p.col - 0.5, p.col + 0.5)) return false;
  if (!clip(y0, dy, p.row - 0.5, p.row + 0.5)) return false;
  return t0 < t1;
}

Obstruction brute_obstruction(const Scene& s, Pixel a, Pixel b, bool cars) {
  Obstruction o;
  for (int r = 0; r < s.size(); ++r)
    for (int c = 0; c < s.size(); ++c) {
      Pixel p{r, c};
      if (p == a || p == b || !segment_hits_cell(a, b, p)) continue;
      if (s.is_building(p)) ++o.building_pixels;
      else if (cars && s.is_car(p)) ++o.car_pixels;
    }
  return o;
}

}  // namespace

TEST(FreeSpace, AnchoredAtM1) {
  EXPECT_NEAR(free_space_pl_db(1), -47.84, 1e-12);
  EXPECT_NEAR(free_space_pl_db(10), -67.84, 1e-12);
  EXPECT_NEAR(free_space_pl_db(0.5), -47.84, 1e-12);
  EXPECT_NEAR(free_space_pl_db(0), -47.84, 1e-12);
}

TEST(SegmentObstruction, HandCases) {
  Scene s = empty_scene(16, {0, 0});
  EXPECT_EQ(segment_obstruction(s, {3, 3}, {3, 3}, true), Obstruction{});
  EXPECT_EQ(segment_obstruction(s, {1, 2}, {14, 9}, true), Obstruction{});
  add_block(s, 0, 6, 16, 3);  // wall at columns 6..8
  EXPECT_EQ(segment_obstruction(s, {5, 2}, {5, 12}, true), (Obstruction{3, 0}));
  s.cars(5, 10) = 1.0;
  EXPECT_EQ(segment_obstruction(s, {5, 2}, {5, 12}, true), (Obstruction{3, 1}));
  EXPECT_EQ(segment_obstruction(s, {5, 2}, {5, 12}, false), (Obstruction{3, 0}));
}

TEST(SegmentObstruction, DiagonalSkipsCornerTouchingCells) {
  int visited = 0;
  traverse_segment({0, 0}, {4, 4}, [&](Pixel p) {
    EXPECT_EQ(p.row, p.col);
    ++visited;
  });
  EXPECT_EQ(visited, 3);
}

TEST(SegmentObstruction, MatchesClippingOracleAndIsSymmetric) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    Scene s = empty_scene(20, {0, 0});
    for (double& v : s.buildings.values()) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < s.cars.size(); ++i)
      if (s.buildings.values()[i] == 0 && uniform01(rng) < 0.2) s.cars.values()[i] = 1.0;
    Pixel a{static_cast<int>(uniform_int(rng, 0, 19)), static_cast<int>(uniform_int(rng, 0, 19))};
    Pixel b{static_cast<int>(uniform_int(rng, 0, 19)), static_cast<int>(uniform_int(rng, 0, 19))};
    auto got = segment_obstruction(s, a, b, true);
    EXPECT_EQ(got, brute_obstruction(s, a, b, true)) << a.row << "," << a.col << " -> " << b.row << "," << b.col;
    EXPECT_EQ(got, segment_obstruction(s, b, a, true));
  }
}

TEST(Simulate, EmptySceneBoundaryAndTruncation) {
  LinkBudget lb;
  Scene s = empty_scene(32, {10, 10});
  Grid g = simulate(s, Fidelity::of(FidelityKind::CoarseA), lb);
  EXPECT_NEAR(g(10, 11), 1.0, 1e-12);
  EXPECT_NEAR(g(10, 10), 1.0, 1e-12);
  EXPECT_NEAR(g(10, 20), to_gray(lb, -67.84), 1e-12);

  LinkBudget shallow = lb;
  shallow.pl_trnc_db = -70.0;  // truncation reached inside the grid
  Grid t = simulate(s, Fidelity::of(FidelityKind::CoarseA), shallow);
  EXPECT_EQ(t(31, 31), 0.0);
  EXPECT_GT(t(10, 12), 0.0);
}

TEST(Simulate, EmptySceneNonincreasingWithDistance) {
  LinkBudget lb;
  Scene s = empty_scene(32, {7, 20});
  Grid g = simulate(s, Fidelity::of(FidelityKind::CoarseB), lb);
  std::vector<std::pair<double, double>> pts;
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) pts.push_back({distance(s.tx, {r, c}), g(r, c)});
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].first > 1.0 && pts[i].first > pts[i - 1].first) EXPECT_LE(pts[i].second, pts[i - 1].second);
}

TEST(Simulate, SingleWallHandEvaluation) {
  LinkBudget lb;
  Scene s = empty_scene(32, {16, 4});
  add_block(s, 0, 12, 32, 4);  // full-height wall, no corner to bend around
  Grid g = simulate(s, Fidelity::of(FidelityKind::CoarseA), lb);
  for (int c = 17; c < 32; ++c) {
    const double expected = to_gray(lb, free_space_pl_db(c - 4) - 2.0 * 4);
    EXPECT_NEAR(g(16, c), expected, 1e-12);
  }
  // Inside the wall: penetration attenuated, not zeroed.
  EXPECT_NEAR(g(16, 14), to_gray(lb, free_space_pl_db(10) - 2.0 * 2), 1e-12);
}

TEST(Simulate, BendsFillShadows) {
  LinkBudget lb;
  Scene s = empty_scene(32, {16, 4});
  add_block(s, 10, 12, 12, 10);  // thick block with corners
  Grid a = simulate(s, Fidelity::of(FidelityKind::CoarseA), lb);
  Grid b = simulate(s, Fidelity::of(FidelityKind::CoarseB), lb);
  int improved = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(b.values()[i], a.values()[i]);
    if (b.values()[i] > a.values()[i] + 1e-9) ++improved;
  }
  EXPECT_GT(b(24, 26), a(24, 26));  // reachable around the lower-left corner
  EXPECT_GT(improved, 20);
}

TEST(Simulate, CoarseBMatchesBruteForceOverCandidates) {
  LinkBudget lb;
  Scene s = empty_scene(20, {3, 3});
  add_block(s, 6, 6, 6, 5);
  add_block(s, 2, 14, 4, 3);
  Fidelity fid = Fidelity::of(FidelityKind::CoarseB);
  auto cands = corner_candidates(s, fid.corner_candidate_stride);
  ASSERT_FALSE(cands.empty());
  Grid db = simulate_db(s, fid, lb, cands);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) {
      Pixel y{r, c};
      double best = free_space_pl_db(distance(s.tx, y)) - 2.0 * brute_obstruction(s, s.tx, y, false).building_pixels;
      for (Pixel k : cands) {
        double v = free_space_pl_db(distance(s.tx, k) + distance(k, y)) - 15.0 -
                   2.0 * (brute_obstruction(s, s.tx, k, false).building_pixels +
                          brute_obstruction(s, k, y, false).building_pixels);
        best = std::max(best, v);
      }
      EXPECT_NEAR(db(r, c), best, 1e-9);
    }
}

TEST(Simulate, AddingBuildingNeverIncreasesGain) {
  LinkBudget lb;
  Rng rng(2);
  for (int trial = 0; trial < 8; ++trial) {
    Scene s = random_scene(100 + trial, 24, {3, 3, 7, 2, 1});
    Fidelity a = Fidelity::of(FidelityKind::CoarseA), b = Fidelity::of(FidelityKind::CoarseB);
    auto cands = corner_candidates(s, b.corner_candidate_stride);
    Grid a0 = simulate(s, a, lb), b0 = simulate(s, b, lb, cands);
    Scene t = s;
    Pixel p;
    do {
      p = {static_cast<int>(uniform_int(rng, 0, 23)), static_cast<int>(uniform_int(rng, 0, 23))};
    } while (p == s.tx);
    t.buildings[p] = 1.0;
    std::erase(cands, p);
    Grid a1 = simulate(t, a, lb), b1 = simulate(t, b, lb, cands);
    for (std::size_t i = 0; i < a0.size(); ++i) {
      EXPECT_LE(a1.values()[i], a0.values()[i]);
      EXPECT_LE(b1.values()[i], b0.values()[i]);
    }
  }
}

TEST(Simulate, CoarseAReciprocity) {
  LinkBudget lb;
  Scene s = random_scene(5, 20, {4, 3, 6, 3, 1});
  auto fid = Fidelity::of(FidelityKind::CoarseA);
  Rng rng(9);
  for (int k = 0; k < 30; ++k) {
    Pixel u{static_cast<int>(uniform_int(rng, 0, 19)), static_cast<int>(uniform_int(rng, 0, 19))};
    Pixel v{static_cast<int>(uniform_int(rng, 0, 19)), static_cast<int>(uniform_int(rng, 0, 19))};
    Grid from_u = simulate_db(s.with_tx(u), fid, lb), from_v = simulate_db(s.with_tx(v), fid, lb);
    EXPECT_EQ(from_u[v], from_v[u]);
  }
}

TEST(Simulate, RefinedWithoutCarsEqualsCoarseB) {
  LinkBudget lb;
  Scene s = random_scene(21, 32, {5, 4, 9, 0, 2});
  ASSERT_EQ(s.cars.sum(), 0.0);
  EXPECT_EQ(simulate(s, Fidelity::of(FidelityKind::Refined), lb), simulate(s, Fidelity::of(FidelityKind::CoarseB), lb));
  Scene with_cars = random_scene(21, 32, {5, 4, 9, 12, 2});
  Grid r = simulate(with_cars, Fidelity::of(FidelityKind::Refined), lb);
  Grid b = simulate(with_cars, Fidelity::of(FidelityKind::CoarseB), lb);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(r.values()[i], b.values()[i]);
}

TEST(Simulate, DeterministicAcrossThreadCounts) {
  LinkBudget lb;
  Scene s = random_scene(4, 32);
  ::setenv("RADIOMAP_THREADS", "1", 1);
  Grid one = simulate(s, Fidelity::of(FidelityKind::Refined), lb);
  ::setenv("RADIOMAP_THREADS", "4", 1);
  Grid four = simulate(s, Fidelity::of(FidelityKind::Refined), lb);
  ::unsetenv("RADIOMAP_THREADS");
  EXPECT_EQ(one, four);
}

TEST(Fidelity, Validation) {
  Scene s = empty_scene(16, {1, 1});
  Fidelity f;
  f.wall_db_per_pixel = -1;
  EXPECT_THROW(simulate(s, f, LinkBudget{}), ConfigError);
  EXPECT_THROW(corner_candidates(s, 0), ConfigError);
  EXPECT_EQ(fidelity_from_string("refined"), FidelityKind::Refined);
  EXPECT_THROW(fidelity_from_string("dpm"), ConfigError);
}
