#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "radiomap/errors.hpp"
#include "radiomap/random.hpp"

namespace radiomap {

/// Integer pixel coordinate. One pixel is one meter.
struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

inline double distance(Pixel a, Pixel b) {
  return std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

/// Dense row-major 2D scalar field. Holds both binary masks and gray-level
/// radio maps.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, double fill = 0.0)
      : height_(height), width_(width), values_(static_cast<std::size_t>(height) * width, fill) {
    if (height < 0 || width < 0) throw std::invalid_argument("negative grid size");
  }
  Grid(int height, int width, std::vector<double> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(height) * width)
      throw std::invalid_argument("grid value count does not match shape");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int r, int c) { return values_[index(r, c)]; }
  double operator()(int r, int c) const { return values_[index(r, c)]; }
  double& operator[](Pixel p) { return (*this)(p.row, p.col); }
  double operator[](Pixel p) const { return (*this)(p.row, p.col); }

  bool contains(Pixel p) const { return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_; }
  bool same_shape(const Grid& o) const { return height_ == o.height_ && width_ == o.width_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * width_ + c; }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// Axis-aligned building footprint.
struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;
  long area() const { return static_cast<long>(height) * width; }
  bool operator==(const Rect&) const = default;
};

struct SceneParams {
  int building_count = 8;
  int building_size_min = 4;
  int building_size_max = 12;
  int car_count = 10;
  int margin = 2;
};

/// City geometry plus a transmitter location.
struct Scene {
  Grid buildings;
  Grid cars;
  Pixel tx;
  std::uint64_t seed = 0;
  std::vector<Rect> rects;
  std::vector<Pixel> car_pixels;

  int size() const { return buildings.height(); }
  bool is_building(Pixel p) const { return buildings[p] != 0.0; }
  bool is_car(Pixel p) const { return cars[p] != 0.0; }

  Scene with_tx(Pixel p) const {
    Scene s = *this;
    s.tx = p;
    return s;
  }
};

/// All pixels outside buildings, in row-major order.
inline std::vector<Pixel> free_pixels(const Scene& scene, bool exclude_cars = false) {
  std::vector<Pixel> out;
  for (int r = 0; r < scene.buildings.height(); ++r)
    for (int c = 0; c < scene.buildings.width(); ++c) {
      Pixel p{r, c};
      if (scene.is_building(p)) continue;
      if (exclude_cars && scene.is_car(p)) continue;
      out.push_back(p);
    }
  return out;
}

/// Uniformly drawn transmitter site: outside buildings and cars.
inline Pixel random_tx(const Scene& scene, Rng& rng) {
  auto candidates = free_pixels(scene, true);
  if (candidates.empty()) throw DataError("no free pixel left for transmitter placement");
  return candidates[uniform_index(rng, candidates.size())];
}

namespace detail {

// Minimum street width between two buildings.
constexpr int kStreetGap = 2;

inline bool rects_conflict(const Rect& a, const Rect& b) {
  return a.row < b.row + b.height + kStreetGap && b.row < a.row + a.height + kStreetGap &&
         a.col < b.col + b.width + kStreetGap && b.col < a.col + a.width + kStreetGap;
}

}  // namespace detail

/// Procedural city: non-overlapping rectangular buildings separated by streets,
/// two-pixel cars parked along building frontages, and a transmitter in free
/// space. A pure function of its arguments.
inline Scene random_scene(std::uint64_t seed, int size, const SceneParams& params = {}) {
  if (size < 16) throw ConfigError("scene size must be at least 16");
  if (params.building_count < 0 || params.car_count < 0) throw ConfigError("negative object count");
  if (params.building_size_min < 1 || params.building_size_max < params.building_size_min)
    throw ConfigError("invalid building size range");

  Rng rng(seed);
  Scene scene;
  scene.seed = seed;
  scene.buildings = Grid(size, size);
  scene.cars = Grid(size, size);

  const int max_side = std::min(params.building_size_max, size - 2 * params.margin);
  const int attempts = 200 * params.building_count;
  for (int a = 0; a < attempts && static_cast<int>(scene.rects.size()) < params.building_count; ++a) {
    if (max_side < params.building_size_min) break;
    Rect r;
    r.height = static_cast<int>(uniform_int(rng, params.building_size_min, max_side));
    r.width = static_cast<int>(uniform_int(rng, params.building_size_min, max_side));
    r.row = static_cast<int>(uniform_int(rng, params.margin, size - params.margin - r.height));
    r.col = static_cast<int>(uniform_int(rng, params.margin, size - params.margin - r.width));
    bool ok = std::none_of(scene.rects.begin(), scene.rects.end(),
                           [&](const Rect& o) { return detail::rects_conflict(r, o); });
    if (!ok) continue;
    scene.rects.push_back(r);
    for (int i = r.row; i < r.row + r.height; ++i)
      for (int j = r.col; j < r.col + r.width; ++j) scene.buildings(i, j) = 1.0;
  }

  // Street corridor: free pixels within three pixels of a building.
  std::vector<Pixel> corridor;
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      if (scene.buildings(r, c) != 0.0) continue;
      bool near = scene.rects.empty();
      for (int dr = -3; dr <= 3 && !near; ++dr)
        for (int dc = -3; dc <= 3 && !near; ++dc) {
          Pixel q{r + dr, c + dc};
          near = scene.buildings.contains(q) && scene.buildings[q] != 0.0;
        }
      if (near) corridor.push_back({r, c});
    }

  int placed = 0;
  for (int a = 0; a < 50 * params.car_count && placed < params.car_count && !corridor.empty(); ++a) {
    Pixel p = corridor[uniform_index(rng, corridor.size())];
    Pixel q = (rng() & 1) ? Pixel{p.row, p.col + 1} : Pixel{p.row + 1, p.col};
    if (!scene.buildings.contains(q)) continue;
    if (scene.is_building(q) || scene.is_car(p) || scene.is_car(q)) continue;
    scene.cars[p] = 1.0;
    scene.cars[q] = 1.0;
    scene.car_pixels.push_back(p);
    scene.car_pixels.push_back(q);
    ++placed;
  }

  scene.tx = random_tx(scene, rng);
  return scene;
}

/// Transmitter channel: one at the Tx pixel, zero elsewhere.
inline Grid tx_onehot(const Scene& scene) {
  Grid g(scene.buildings.height(), scene.buildings.width());
  g[scene.tx] = 1.0;
  return g;
}

struct DatasetSplit {
  std::vector<int> train_map_ids;
  std::vector<int> val_map_ids;
  std::vector<int> test_map_ids;
};

struct SplitFractions {
  double train = 5.0 / 7.0;
  double val = 1.0 / 7.0;
  double test = 1.0 / 7.0;
};

/// Seeded random partition of map ids [0, n_maps) into train/val/test.
inline DatasetSplit split_maps(int n_maps, const SplitFractions& f, std::uint64_t seed) {
  if (n_maps < 3) throw ConfigError("split_maps needs at least 3 maps");
  if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-6)
    throw ConfigError("split fractions must be non-negative and sum to 1");
  std::vector<int> ids(n_maps);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed);
  shuffle(ids, rng);
  const int n_train = static_cast<int>(std::lround(f.train * n_maps));
  const int n_val = std::min(n_maps - n_train, static_cast<int>(std::lround(f.val * n_maps)));
  DatasetSplit s;
  s.train_map_ids.assign(ids.begin(), ids.begin() + n_train);
  s.val_map_ids.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  s.test_map_ids.assign(ids.begin() + n_train + n_val, ids.end());
  return s;
}

}  // namespace radiomap
