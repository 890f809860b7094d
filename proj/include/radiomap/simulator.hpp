#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/linkbudget.hpp"
#include "radiomap/parallel.hpp"

namespace radiomap {

enum class FidelityKind { CoarseA, CoarseB, Refined };

inline std::string to_string(FidelityKind k) {
  switch (k) {
    case FidelityKind::CoarseA: return "coarseA";
    case FidelityKind::CoarseB: return "coarseB";
    case FidelityKind::Refined: return "refined";
  }
  return "?";
}

inline FidelityKind fidelity_from_string(const std::string& s) {
  if (s == "coarseA") return FidelityKind::CoarseA;
  if (s == "coarseB") return FidelityKind::CoarseB;
  if (s == "refined") return FidelityKind::Refined;
  throw ConfigError("unknown fidelity '" + s + "'");
}

/// Simulator fidelity. CoarseA: direct path through walls. CoarseB: adds
/// single-bend paths around building corners. Refined: CoarseB plus car
/// attenuation.
struct Fidelity {
  FidelityKind kind = FidelityKind::CoarseA;
  double wall_db_per_pixel = 2.0;
  double car_db_per_pixel = 1.0;
  double bend_penalty_db = 15.0;
  int corner_candidate_stride = 2;

  static Fidelity of(FidelityKind k) {
    Fidelity f;
    f.kind = k;
    return f;
  }
  bool uses_bends() const { return kind != FidelityKind::CoarseA; }
  bool uses_cars() const { return kind == FidelityKind::Refined; }
};

/// Free-space loss anchored so that one meter gives the maximal pathloss M1.
inline double free_space_pl_db(double d_meters, double m1_db = LinkBudget{}.m1_db) {
  return m1_db - 20.0 * std::log10(std::max(d_meters, 1.0));
}

/// Visits, in order from a to b, every cell whose interior the open segment
/// between the two cell centres crosses. Endpoint cells are not visited. When
/// the segment passes exactly through a grid vertex the two cells touching it
/// only at that corner are skipped.
template <typename Visit>
void traverse_segment(Pixel a, Pixel b, Visit&& visit) {
  const int dr = b.row - a.row, dc = b.col - a.col;
  const long nr = std::abs(dr), nc = std::abs(dc);
  const int sr = dr > 0 ? 1 : -1, sc = dc > 0 ? 1 : -1;
  long i = 0, j = 0;
  Pixel cur = a;
  while (i < nr || j < nc) {
    // Next row boundary at t = (2i+1)/(2 nr), next column boundary at
    // t = (2j+1)/(2 nc); compare cross-multiplied.
    bool step_r, step_c;
    if (i == nr) {
      step_r = false, step_c = true;
    } else if (j == nc) {
      step_r = true, step_c = false;
    } else {
      const long tc = (2 * j + 1) * nr, tr = (2 * i + 1) * nc;
      step_c = tc <= tr;
      step_r = tr <= tc;
    }
    if (step_r) cur.row += sr, ++i;
    if (step_c) cur.col += sc, ++j;
    if (cur != b) visit(cur);
  }
}

struct Obstruction {
  int building_pixels = 0;
  int car_pixels = 0;
  bool operator==(const Obstruction&) const = default;
};

inline Obstruction segment_obstruction(const Scene& scene, Pixel a, Pixel b, bool include_cars) {
  Obstruction o;
  traverse_segment(a, b, [&](Pixel p) {
    if (scene.is_building(p)) ++o.building_pixels;
    else if (include_cars && scene.is_car(p)) ++o.car_pixels;
  });
  return o;
}

/// Diffraction points for bent paths: free pixels on building outlines that
/// are either convex corners or on the stride lattice.
inline std::vector<Pixel> corner_candidates(const Scene& scene, int stride) {
  if (stride < 1) throw ConfigError("corner_candidate_stride must be >= 1");
  const Grid& b = scene.buildings;
  auto bld = [&](int r, int c) { return b.contains({r, c}) && b(r, c) != 0.0; };
  std::vector<Pixel> out;
  for (int r = 0; r < b.height(); ++r)
    for (int c = 0; c < b.width(); ++c) {
      if (bld(r, c)) continue;
      bool touches = false, convex = false;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr || dc) && bld(r + dr, c + dc)) touches = true;
          if (dr && dc && bld(r + dr, c + dc) && !bld(r + dr, c) && !bld(r, c + dc)) convex = true;
        }
      if (!touches) continue;
      if (convex || (r % stride == 0 && c % stride == 0)) out.push_back({r, c});
    }
  return out;
}

/// Pathloss in dB at every pixel for the given transmitter, using an explicit
/// set of bend candidates (ignored for CoarseA).
inline Grid simulate_db(const Scene& scene, const Fidelity& fid, const LinkBudget& lb,
                        const std::vector<Pixel>& candidates) {
  if (fid.wall_db_per_pixel < 0 || fid.car_db_per_pixel < 0 || fid.bend_penalty_db < 0)
    throw ConfigError("fidelity penalties must be non-negative");
  const int h = scene.buildings.height(), w = scene.buildings.width();
  const bool cars = fid.uses_cars();
  auto penalty = [&](Obstruction o) {
    return fid.wall_db_per_pixel * o.building_pixels + (cars ? fid.car_db_per_pixel * o.car_pixels : 0.0);
  };

  struct Leg {
    Pixel at;
    double length;
    double penalty;
  };
  std::vector<Leg> legs;
  if (fid.uses_bends()) {
    legs.reserve(candidates.size());
    for (Pixel c : candidates)
      legs.push_back({c, distance(scene.tx, c), penalty(segment_obstruction(scene, scene.tx, c, cars))});
  }

  Grid out(h, w);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    for (int col = 0; col < w; ++col) {
      Pixel y{static_cast<int>(row), col};
      double best = free_space_pl_db(distance(scene.tx, y), lb.m1_db) -
                    penalty(segment_obstruction(scene, scene.tx, y, cars));
      for (const Leg& leg : legs) {
        const double bound =
            free_space_pl_db(leg.length + distance(leg.at, y), lb.m1_db) - leg.penalty - fid.bend_penalty_db;
        if (bound <= best) continue;
        best = std::max(best, bound - penalty(segment_obstruction(scene, leg.at, y, cars)));
      }
      out(y.row, y.col) = best;
    }
  });
  return out;
}

inline Grid simulate_db(const Scene& scene, const Fidelity& fid, const LinkBudget& lb) {
  std::vector<Pixel> candidates;
  if (fid.uses_bends()) candidates = corner_candidates(scene, fid.corner_candidate_stride);
  return simulate_db(scene, fid, lb, candidates);
}

inline Grid db_to_gray(const LinkBudget& lb, Grid g) {
  for (double& v : g.values()) v = to_gray(lb, v);
  return g;
}

/// Gray-level radio map of the scene's transmitter.
inline Grid simulate(const Scene& scene, const Fidelity& fid, const LinkBudget& lb) {
  return db_to_gray(lb, simulate_db(scene, fid, lb));
}

inline Grid simulate(const Scene& scene, const Fidelity& fid, const LinkBudget& lb,
                     const std::vector<Pixel>& candidates) {
  return db_to_gray(lb, simulate_db(scene, fid, lb, candidates));
}

}  // namespace radiomap
