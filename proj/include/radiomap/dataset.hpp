#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "radiomap/checkpoint.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/linkbudget.hpp"
#include "radiomap/pgm.hpp"
#include "radiomap/simulator.hpp"
#include "radiomap/training.hpp"

namespace radiomap {

struct DatasetConfig {
  int maps = 100;
  int tx_per_map = 4;
  int size = 64;
  std::uint64_t seed = 0;
  SceneParams scene;
  int refined_samples = 100;  // K sparse refined measurements per transmitter
  SplitFractions split{0.6, 0.2, 0.2};
  LinkBudget link_budget;
  Fidelity fidelity;  // penalties and candidate stride; the kind is ignored
};

inline void validate(const DatasetConfig& c) {
  if (c.maps < 1) throw ConfigError("dataset: need at least 1 map");
  if (c.tx_per_map < 1) throw ConfigError("dataset: tx_per_map must be >= 1");
  if (c.size < 16) throw ConfigError("dataset: size must be >= 16");
  if (c.refined_samples < 0) throw ConfigError("dataset: refined_samples must be >= 0");
}

inline json to_json(const SceneParams& p) {
  return {{"building_count", p.building_count}, {"building_size_min", p.building_size_min},
          {"building_size_max", p.building_size_max}, {"car_count", p.car_count}, {"margin", p.margin}};
}

inline SceneParams scene_params_from_json(const json& j) {
  check_keys(j, {"building_count", "building_size_min", "building_size_max", "car_count", "margin"}, "scene");
  SceneParams p;
  p.building_count = j.value("building_count", p.building_count);
  p.building_size_min = j.value("building_size_min", p.building_size_min);
  p.building_size_max = j.value("building_size_max", p.building_size_max);
  p.car_count = j.value("car_count", p.car_count);
  p.margin = j.value("margin", p.margin);
  return p;
}

inline json to_json(const LinkBudget& lb) {
  return {{"p_tx_dbm", lb.p_tx_dbm}, {"n0_dbm_per_hz", lb.n0_dbm_per_hz}, {"bandwidth_hz", lb.bandwidth_hz},
          {"nf_db", lb.nf_db},       {"m1_db", lb.m1_db},                 {"pl_trnc_db", lb.pl_trnc_db}};
}

inline LinkBudget link_budget_from_json(const json& j) {
  check_keys(j, {"p_tx_dbm", "n0_dbm_per_hz", "bandwidth_hz", "nf_db", "m1_db", "pl_trnc_db"}, "link_budget");
  LinkBudget lb;
  lb.p_tx_dbm = j.value("p_tx_dbm", lb.p_tx_dbm);
  lb.n0_dbm_per_hz = j.value("n0_dbm_per_hz", lb.n0_dbm_per_hz);
  lb.bandwidth_hz = j.value("bandwidth_hz", lb.bandwidth_hz);
  lb.nf_db = j.value("nf_db", lb.nf_db);
  lb.m1_db = j.value("m1_db", lb.m1_db);
  lb.pl_trnc_db = j.value("pl_trnc_db", lb.pl_trnc_db);
  if (!(lb.m1_db > lb.pl_trnc_db)) throw ConfigError("link_budget: m1_db must exceed pl_trnc_db");
  return lb;
}

inline json to_json(const Fidelity& f) {
  return {{"wall_db_per_pixel", f.wall_db_per_pixel},
          {"car_db_per_pixel", f.car_db_per_pixel},
          {"bend_penalty_db", f.bend_penalty_db},
          {"corner_candidate_stride", f.corner_candidate_stride}};
}

inline Fidelity fidelity_from_json(const json& j) {
  check_keys(j, {"wall_db_per_pixel", "car_db_per_pixel", "bend_penalty_db", "corner_candidate_stride"}, "fidelity");
  Fidelity f;
  f.wall_db_per_pixel = j.value("wall_db_per_pixel", f.wall_db_per_pixel);
  f.car_db_per_pixel = j.value("car_db_per_pixel", f.car_db_per_pixel);
  f.bend_penalty_db = j.value("bend_penalty_db", f.bend_penalty_db);
  f.corner_candidate_stride = j.value("corner_candidate_stride", f.corner_candidate_stride);
  return f;
}

inline json to_json(const DatasetConfig& c) {
  return {{"maps", c.maps},
          {"tx_per_map", c.tx_per_map},
          {"size", c.size},
          {"seed", c.seed},
          {"scene", to_json(c.scene)},
          {"refined_samples", c.refined_samples},
          {"split", {c.split.train, c.split.val, c.split.test}},
          {"link_budget", to_json(c.link_budget)},
          {"fidelity", to_json(c.fidelity)}};
}

inline DatasetConfig dataset_config_from_json(const json& j) {
  check_keys(j, {"maps", "tx_per_map", "size", "seed", "scene", "refined_samples", "split", "link_budget", "fidelity"},
             "dataset");
  DatasetConfig c;
  c.maps = j.value("maps", c.maps);
  c.tx_per_map = j.value("tx_per_map", c.tx_per_map);
  c.size = j.value("size", c.size);
  c.seed = j.value("seed", c.seed);
  if (j.contains("scene")) c.scene = scene_params_from_json(j.at("scene"));
  c.refined_samples = j.value("refined_samples", c.refined_samples);
  if (j.contains("split")) {
    auto f = j.at("split").get<std::vector<double>>();
    if (f.size() != 3) throw ConfigError("dataset: split needs three fractions");
    c.split = {f[0], f[1], f[2]};
  }
  if (j.contains("link_budget")) c.link_budget = link_budget_from_json(j.at("link_budget"));
  if (j.contains("fidelity")) c.fidelity = fidelity_from_json(j.at("fidelity"));
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// In-memory dataset.

struct TxRecord {
  Pixel tx;
  Grid coarse_a, coarse_b, refined;
  SparseSamples samples;  // sparse refined measurements

  const Grid& gain(FidelityKind k) const {
    switch (k) {
      case FidelityKind::CoarseA: return coarse_a;
      case FidelityKind::CoarseB: return coarse_b;
      case FidelityKind::Refined: return refined;
    }
    return refined;
  }
};

struct MapRecord {
  int id = 0;
  std::uint64_t seed = 0;
  Scene scene;
  std::vector<TxRecord> txs;
};

struct Dataset {
  DatasetConfig config;
  DatasetSplit split;
  std::vector<MapRecord> maps;

  const MapRecord& map(int id) const { return maps.at(static_cast<std::size_t>(id)); }
};

inline Fidelity fidelity_of(const DatasetConfig& c, FidelityKind k) {
  Fidelity f = c.fidelity;
  f.kind = k;
  return f;
}

/// Scene, transmitters, all three fidelities and sparse refined samples for
/// one map; a pure function of (config, id).
inline MapRecord generate_map(const DatasetConfig& c, int id) {
  MapRecord m;
  m.id = id;
  m.seed = c.seed + static_cast<std::uint64_t>(id);
  m.scene = random_scene(m.seed, c.size, c.scene);
  Rng rng(derive_seed(m.seed, 1));
  const auto pool = free_pixels(m.scene, true);
  if (pool.size() < static_cast<std::size_t>(c.tx_per_map))
    throw DataError("map " + std::to_string(id) + ": not enough free pixels for " + std::to_string(c.tx_per_map) +
                    " transmitters");
  const auto candidates = corner_candidates(m.scene, c.fidelity.corner_candidate_stride);
  for (std::size_t i : sample_without_replacement(rng, pool.size(), static_cast<std::size_t>(c.tx_per_map))) {
    TxRecord t;
    t.tx = pool[i];
    const Scene s = m.scene.with_tx(t.tx);
    t.coarse_a = simulate(s, fidelity_of(c, FidelityKind::CoarseA), c.link_budget);
    t.coarse_b = simulate(s, fidelity_of(c, FidelityKind::CoarseB), c.link_budget, candidates);
    t.refined = simulate(s, fidelity_of(c, FidelityKind::Refined), c.link_budget, candidates);
    t.samples = sample_measurements(t.refined, s, static_cast<std::size_t>(c.refined_samples), rng);
    m.txs.push_back(std::move(t));
  }
  m.scene.tx = m.txs.front().tx;
  return m;
}

inline Dataset generate_dataset(const DatasetConfig& c) {
  validate(c);
  Dataset d;
  d.config = c;
  if (c.maps >= 3) {
    d.split = split_maps(c.maps, c.split, c.seed);
  } else {
    // Too few maps to split: everything is training data.
    for (int i = 0; i < c.maps; ++i) d.split.train_map_ids.push_back(i);
  }
  for (int i = 0; i < c.maps; ++i) d.maps.push_back(generate_map(c, i));
  return d;
}

// ---------------------------------------------------------------------------
// On-disk layout:
//   manifest.json
//   maps/<id>/buildings.pgm, cars.pgm, tx.json
//   maps/<id>/tx<j>/gain_<fidelity>.pgm, samples.json

inline constexpr FidelityKind kAllFidelities[] = {FidelityKind::CoarseA, FidelityKind::CoarseB, FidelityKind::Refined};

inline std::string fnv1a_hex(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ull;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

inline void write_json(const json& j, const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

/// Fails on an existing non-empty directory unless `force`, which clears it.
inline void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw ConfigError("output directory " + dir.string() + " is not empty (use --force)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

inline Pixel pixel_from_json(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

inline json split_to_json(const DatasetSplit& s) {
  return {{"train", s.train_map_ids}, {"val", s.val_map_ids}, {"test", s.test_map_ids}};
}

inline DatasetSplit split_from_json(const json& j) {
  DatasetSplit s;
  s.train_map_ids = j.at("train").get<std::vector<int>>();
  s.val_map_ids = j.at("val").get<std::vector<int>>();
  s.test_map_ids = j.at("test").get<std::vector<int>>();
  return s;
}

inline std::string map_dir_name(int id) {
  char b[16];
  std::snprintf(b, sizeof b, "%04d", id);
  return b;
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& dir, bool force = false) {
  namespace fs = std::filesystem;
  prepare_output_dir(dir, force);
  json files = json::object();
  json stats = json::array();
  long total_buildings = 0, total_cars = 0;
  auto record = [&](const fs::path& p) { files[fs::relative(p, dir).generic_string()] = fnv1a_hex(p); };
  for (const MapRecord& m : d.maps) {
    const fs::path md = dir / "maps" / map_dir_name(m.id);
    fs::create_directories(md);
    save_pgm(m.scene.buildings, md / "buildings.pgm");
    save_pgm(m.scene.cars, md / "cars.pgm");
    json rects = json::array(), cars = json::array(), txs = json::array();
    for (const Rect& r : m.scene.rects) rects.push_back({r.row, r.col, r.height, r.width});
    for (Pixel p : m.scene.car_pixels) cars.push_back({p.row, p.col});
    for (const TxRecord& t : m.txs) txs.push_back({t.tx.row, t.tx.col});
    write_json({{"id", m.id}, {"seed", m.seed}, {"size", m.scene.size()}, {"rects", rects}, {"cars", cars}, {"tx", txs}},
               md / "tx.json");
    record(md / "buildings.pgm");
    record(md / "cars.pgm");
    record(md / "tx.json");
    for (std::size_t j = 0; j < m.txs.size(); ++j) {
      const TxRecord& t = m.txs[j];
      const fs::path td = md / ("tx" + std::to_string(j));
      fs::create_directories(td);
      for (FidelityKind k : kAllFidelities) {
        const fs::path p = td / ("gain_" + to_string(k) + ".pgm");
        save_pgm(t.gain(k), p);
        record(p);
      }
      json locs = json::array();
      for (Pixel p : t.samples.locations) locs.push_back({p.row, p.col});
      write_json({{"locations", locs}, {"values", t.samples.values}}, td / "samples.json");
      record(td / "samples.json");
    }
    const long b = static_cast<long>(m.scene.buildings.sum()), c = static_cast<long>(m.scene.cars.sum());
    total_buildings += b, total_cars += c;
    stats.push_back({{"id", m.id}, {"building_pixels", b}, {"car_pixels", c}});
  }
  const long gain_maps = static_cast<long>(d.maps.size()) * d.config.tx_per_map * 3;
  json manifest = {{"version", 1},
                   {"config", to_json(d.config)},
                   {"counts", {{"maps", d.maps.size()}, {"tx_per_map", d.config.tx_per_map}, {"gain_maps", gain_maps}}},
                   {"seeds", {{"base", d.config.seed}, {"per_map_rule", "base + id"}}},
                   {"split", split_to_json(d.split)},
                   {"stats",
                    {{"per_map", stats}, {"building_pixels", total_buildings}, {"car_pixels", total_cars}}},
                   {"files", files}};
  write_json(manifest, dir / "manifest.json");
}

/// Loads a dataset directory. With `verify`, every file checksum listed in the
/// manifest is recomputed.
inline Dataset load_dataset(const std::filesystem::path& dir, bool verify = true) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir / "manifest.json")) throw DataError("no dataset at " + dir.string() + " (manifest.json missing)");
  const json manifest = read_json(dir / "manifest.json");
  Dataset d;
  try {
    d.config = dataset_config_from_json(manifest.at("config"));
    d.split = split_from_json(manifest.at("split"));
    if (verify)
      for (const auto& [rel, sum] : manifest.at("files").items())
        if (fnv1a_hex(dir / rel) != sum.get<std::string>()) throw DataError("checksum mismatch for " + rel);
    const int n = manifest.at("counts").at("maps").get<int>();
    for (int id = 0; id < n; ++id) {
      const fs::path md = dir / "maps" / map_dir_name(id);
      const json meta = read_json(md / "tx.json");
      MapRecord m;
      m.id = id;
      m.seed = meta.at("seed").get<std::uint64_t>();
      m.scene.buildings = load_pgm(md / "buildings.pgm");
      m.scene.cars = load_pgm(md / "cars.pgm");
      m.scene.seed = m.seed;
      for (const auto& r : meta.at("rects")) m.scene.rects.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>()});
      for (const auto& p : meta.at("cars")) m.scene.car_pixels.push_back(pixel_from_json(p));
      const auto txs = meta.at("tx");
      for (std::size_t j = 0; j < txs.size(); ++j) {
        const fs::path td = md / ("tx" + std::to_string(j));
        TxRecord t;
        t.tx = pixel_from_json(txs[j]);
        t.coarse_a = load_pgm(td / "gain_coarseA.pgm");
        t.coarse_b = load_pgm(td / "gain_coarseB.pgm");
        t.refined = load_pgm(td / "gain_refined.pgm");
        const json s = read_json(td / "samples.json");
        for (const auto& p : s.at("locations")) t.samples.locations.push_back(pixel_from_json(p));
        t.samples.values = s.at("values").get<std::vector<double>>();
        m.txs.push_back(std::move(t));
      }
      if (m.txs.empty()) throw DataError("map " + std::to_string(id) + " has no transmitters");
      m.scene.tx = m.txs.front().tx;
      d.maps.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed dataset manifest or sidecar in " + dir.string() + ": " + e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Sample-set assembly.

enum class TargetKind { CoarseA, CoarseB, Refined, RandomAB };

inline TargetKind target_for(FidelityMode m) {
  switch (m) {
    case FidelityMode::FixedA: return TargetKind::CoarseA;
    case FidelityMode::FixedB: return TargetKind::CoarseB;
    case FidelityMode::RandomAB: return TargetKind::RandomAB;
  }
  return TargetKind::CoarseB;
}

/// Input channels in order: buildings, tx one-hot, [cars], [measurements].
struct InputLayout {
  bool cars = false;
  bool samples = false;
  std::size_t samples_min = 1;  // per-sample count drawn uniformly in [min, max]
  std::size_t samples_max = 50;

  int channels() const { return 2 + cars + samples; }
};

struct SampleKey {
  int map_id = 0;
  int tx_index = 0;
  FidelityKind target = FidelityKind::CoarseB;
  SparseSamples measurements;  // the measurement channel's content, if any
};

template <typename T>
struct LabeledSet {
  SampleSet<T> set;
  std::vector<SampleKey> keys;
};

/// One sample per (map, tx). RandomAB picks CoarseA or CoarseB per sample
/// from a seeded stream, fixed for the lifetime of the set.
template <typename T>
LabeledSet<T> build_sample_set(const Dataset& d, const std::vector<int>& map_ids, TargetKind target,
                               const InputLayout& layout, std::uint64_t seed) {
  LabeledSet<T> out;
  const int n = d.config.size;
  out.set.channels = static_cast<std::size_t>(layout.channels());
  out.set.height = out.set.width = static_cast<std::size_t>(n);
  for (int id : map_ids) {
    const MapRecord& m = d.map(id);
    for (std::size_t j = 0; j < m.txs.size(); ++j) {
      const TxRecord& t = m.txs[j];
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(id), j));
      SampleKey key{id, static_cast<int>(j), FidelityKind::CoarseB, {}};
      switch (target) {
        case TargetKind::CoarseA: key.target = FidelityKind::CoarseA; break;
        case TargetKind::CoarseB: key.target = FidelityKind::CoarseB; break;
        case TargetKind::Refined: key.target = FidelityKind::Refined; break;
        case TargetKind::RandomAB: key.target = uniform_index(rng, 2) ? FidelityKind::CoarseB : FidelityKind::CoarseA; break;
      }
      const Grid& gain = t.gain(key.target);
      const Scene s = m.scene.with_tx(t.tx);
      const Grid tx = tx_onehot(s);
      std::vector<const Grid*> channels{&m.scene.buildings, &tx};
      if (layout.cars) channels.push_back(&m.scene.cars);
      Grid meas;
      if (layout.samples) {
        key.measurements = sample_measurements(gain, s, draw_sample_count(rng, layout.samples_min, layout.samples_max), rng);
        meas = render_samples(key.measurements, n, n);
        channels.push_back(&meas);
      }
      out.set.add(stack_channels<T>(channels), stack_channels<T>({&gain}));
      out.keys.push_back(std::move(key));
    }
  }
  return out;
}

/// Targets are dense refined maps; weights are 1/K at the stored sparse
/// refined samples, so only measured pixels contribute to the loss.
template <typename T>
LabeledSet<T> build_sparse_refined_set(const Dataset& d, const std::vector<int>& map_ids, const InputLayout& layout) {
  if (layout.samples) throw ConfigError("sparse refined sets take no measurement input channel");
  LabeledSet<T> out = build_sample_set<T>(d, map_ids, TargetKind::Refined, layout, 0);
  const int n = d.config.size;
  for (const SampleKey& k : out.keys) {
    const Grid w = sample_weights(d.map(k.map_id).txs[static_cast<std::size_t>(k.tx_index)].samples, n, n);
    out.set.weights.push_back(stack_channels<T>({&w}));
  }
  return out;
}

}  // namespace radiomap
