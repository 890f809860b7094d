#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "radiomap/errors.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/random.hpp"
#include "radiomap/tensor.hpp"

namespace radiomap {

/// Encoder/decoder architecture. Each stage is two 3x3 (kernel_size) conv +
/// ReLU layers; stages are separated by 2x2 max pooling on the way down and
/// nearest-neighbour upsampling plus skip concatenation on the way up. The
/// network input is concatenated again in front of the final 1x1 conv.
struct UNetSpec {
  int in_channels = 2;
  std::vector<int> stage_channels{16, 32, 64, 128};
  int kernel_size = 3;
  int out_channels = 1;
  Padding padding = Padding::Zero;

  bool operator==(const UNetSpec&) const = default;
};

struct LayerShape {
  int in_channels;
  int out_channels;
  int kernel;
  int downsample;  // spatial size divisor at which the layer runs

  long param_count() const { return static_cast<long>(kernel) * kernel * in_channels * out_channels + out_channels; }
};

inline void validate(const UNetSpec& s) {
  if (s.stage_channels.size() < 2) throw ConfigError("UNetSpec: need at least two stages");
  if (s.in_channels < 1 || s.out_channels < 1) throw ConfigError("UNetSpec: channel counts must be >= 1");
  if (s.kernel_size < 1 || s.kernel_size % 2 == 0) throw ConfigError("UNetSpec: kernel_size must be odd");
  for (int c : s.stage_channels)
    if (c < 1) throw ConfigError("UNetSpec: stage channels must be >= 1");
}

/// Conv layers in construction (and parameter) order.
inline std::vector<LayerShape> layer_table(const UNetSpec& s) {
  validate(s);
  const int S = static_cast<int>(s.stage_channels.size()), k = s.kernel_size;
  std::vector<LayerShape> t;
  int prev = s.in_channels;
  for (int i = 0; i < S; ++i) {
    const int c = s.stage_channels[i], d = 1 << i;
    t.push_back({prev, c, k, d});
    t.push_back({c, c, k, d});
    prev = c;
  }
  for (int i = S - 2; i >= 0; --i) {
    const int c = s.stage_channels[i], d = 1 << i;
    t.push_back({s.stage_channels[i + 1] + c, c, k, d});
    t.push_back({c, c, k, d});
  }
  t.push_back({s.stage_channels[0] + s.in_channels, s.out_channels, 1, 1});
  return t;
}

inline long param_count(const UNetSpec& s) {
  long n = 0;
  for (const auto& l : layer_table(s)) n += l.param_count();
  return n;
}

/// Multiply-accumulate count times two for one n x n forward pass.
inline long double forward_flops(const UNetSpec& s, int n) {
  long double f = 0;
  for (const auto& l : layer_table(s)) {
    const long double side = static_cast<long double>(n) / l.downsample;
    f += 2.0L * l.kernel * l.kernel * l.in_channels * l.out_channels * side * side;
  }
  return f;
}

namespace detail {

template <typename T>
std::vector<T> uniform_init(Rng& rng, std::size_t n, double bound) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(uniform_real(rng, -bound, bound));
  return v;
}

}  // namespace detail

template <typename T = double>
class UNet {
 public:
  UNet() = default;
  UNet(UNetSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    Rng rng(seed);
    for (const auto& l : layer_table(spec_)) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_channels) * l.kernel * l.kernel);
      const std::size_t kk = static_cast<std::size_t>(l.kernel) * l.kernel;
      params_.push_back(Tensor<T>::parameter(
          {std::size_t(l.out_channels), std::size_t(l.in_channels), std::size_t(l.kernel), std::size_t(l.kernel)},
          detail::uniform_init<T>(rng, kk * l.in_channels * l.out_channels, bound)));
      params_.push_back(Tensor<T>::parameter({std::size_t(l.out_channels)},
                                             detail::uniform_init<T>(rng, l.out_channels, bound)));
    }
  }

  const UNetSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<Tensor<T>>& parameters() { return params_; }
  const std::vector<Tensor<T>>& parameters() const { return params_; }

  /// Deep copy; copying a UNet by value shares parameter storage.
  UNet clone() const {
    UNet c;
    c.spec_ = spec_;
    c.seed_ = seed_;
    for (const auto& t : params_) c.params_.push_back(Tensor<T>::parameter(t.shape(), {t.data().begin(), t.data().end()}));
    return c;
  }

  /// (N, in_channels, n, n) -> (N, out_channels, n, n).
  Tensor<T> forward(const Tensor<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != static_cast<std::size_t>(spec_.in_channels))
      throw ShapeError("UNet expects " + std::to_string(spec_.in_channels) + " input channels, got shape " +
                       shape_str(x.shape()));
    const std::size_t S = spec_.stage_channels.size(), div = std::size_t{1} << (S - 1);
    if (x.dim(2) % div != 0 || x.dim(3) % div != 0)
      throw ShapeError("UNet input size " + shape_str(x.shape()) + " not divisible by " + std::to_string(div));

    std::size_t li = 0;
    auto conv = [&](const Tensor<T>& h) {
      Tensor<T> out = conv2d(h, params_[2 * li], params_[2 * li + 1], spec_.padding);
      ++li;
      return out;
    };
    std::vector<Tensor<T>> skips;
    Tensor<T> h = x;
    for (std::size_t i = 0; i < S; ++i) {
      if (i > 0) h = maxpool2(h);
      h = relu(conv(h));
      h = relu(conv(h));
      if (i + 1 < S) skips.push_back(h);
    }
    for (std::size_t i = S - 1; i-- > 0;) {
      h = concat_channels(skips[i], upsample2(h));
      h = relu(conv(h));
      h = relu(conv(h));
    }
    return conv(concat_channels(h, x));
  }

  /// Final 1x1 layer copies input channel `channel` and (almost) ignores the
  /// rest: feature weights are scaled by `residual`.
  void set_passthrough(int channel, T residual = T(0)) {
    auto& w = params_[params_.size() - 2];
    auto& b = params_.back();
    const std::size_t cin = w.dim(1), c0 = static_cast<std::size_t>(spec_.stage_channels[0]);
    for (std::size_t o = 0; o < w.dim(0); ++o)
      for (std::size_t i = 0; i < cin; ++i) {
        T& v = w.data()[o * cin + i];
        v = (i == c0 + static_cast<std::size_t>(channel)) ? T(1) : (i < c0 ? v * residual : T(0));
      }
    std::fill(b.data().begin(), b.data().end(), T(0));
  }

 private:
  UNetSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<Tensor<T>> params_;
};

enum class WNetMode { Retrospective, Adaptation, Thresholder };

inline std::string to_string(WNetMode m) {
  switch (m) {
    case WNetMode::Retrospective: return "retrospective";
    case WNetMode::Adaptation: return "adaptation";
    case WNetMode::Thresholder: return "thresholder";
  }
  return "?";
}

inline WNetMode wnet_mode_from_string(const std::string& s) {
  if (s == "retrospective") return WNetMode::Retrospective;
  if (s == "adaptation") return WNetMode::Adaptation;
  if (s == "thresholder") return WNetMode::Thresholder;
  throw ConfigError("unknown WNet mode '" + s + "'");
}

struct WNetSpec {
  UNetSpec first;
  UNetSpec second;
  WNetMode mode = WNetMode::Retrospective;
};

inline void validate(const WNetSpec& s) {
  validate(s.first);
  validate(s.second);
  if (s.second.in_channels != s.first.in_channels + 1)
    throw ConfigError("WNetSpec: second UNet must take first.in_channels + 1 inputs");
  if (s.first.out_channels != 1) throw ConfigError("WNetSpec: first UNet must have one output channel");
}

/// Two UNets in sequence; the second sees the inputs plus the first's output.
template <typename T = double>
class WNet {
 public:
  WNet() = default;
  WNet(WNetSpec spec, UNet<T> first, std::uint64_t second_seed)
      : mode_(spec.mode), first_(std::move(first)), second_(spec.second, second_seed) {
    if (!(first_.spec() == spec.first)) throw ConfigError("WNet: first UNet does not match spec");
    validate(spec);
  }
  WNet(WNetSpec spec, UNet<T> first, UNet<T> second) : mode_(spec.mode), first_(std::move(first)), second_(std::move(second)) {
    validate(spec);
  }

  WNetSpec spec() const { return {first_.spec(), second_.spec(), mode_}; }
  WNetMode mode() const { return mode_; }
  UNet<T>& first() { return first_; }
  const UNet<T>& first() const { return first_; }
  UNet<T>& second() { return second_; }
  const UNet<T>& second() const { return second_; }

  WNet clone() const {
    WNet c(spec(), first_.clone(), second_.clone());
    c.first_frozen_ = first_frozen_;
    return c;
  }

  bool first_frozen() const { return first_frozen_; }
  void set_first_frozen(bool f) { first_frozen_ = f; }

  /// Second-stage input: the original channels followed by the first output.
  Tensor<T> second_input(const Tensor<T>& x) const {
    Tensor<T> f = first_.forward(x);
    if (first_frozen_) f = f.detach();
    return concat_channels(x, f);
  }

  Tensor<T> head(const Tensor<T>& second_out) const {
    return mode_ == WNetMode::Thresholder ? sigmoid(second_out) : second_out;
  }

  /// Forward from precomputed second-stage input.
  Tensor<T> forward_second(const Tensor<T>& augmented) const { return head(second_.forward(augmented)); }

  Tensor<T> forward(const Tensor<T>& x) const { return forward_second(second_input(x)); }

  std::vector<Tensor<T>> parameters() {
    std::vector<Tensor<T>> p = first_frozen_ ? std::vector<Tensor<T>>{} : first_.parameters();
    p.insert(p.end(), second_.parameters().begin(), second_.parameters().end());
    return p;
  }

 private:
  WNetMode mode_ = WNetMode::Retrospective;
  UNet<T> first_;
  UNet<T> second_;
  bool first_frozen_ = true;
};

/// Fully connected regressor from (tx, rx) coordinates to a gray level.
struct MlpSpec {
  std::vector<int> hidden_sizes{128, 128, 128};
  bool operator==(const MlpSpec&) const = default;
};

inline constexpr int kMlpInputs = 4;

inline long param_count(const MlpSpec& s) {
  long n = 0;
  int prev = kMlpInputs;
  for (int h : s.hidden_sizes) {
    n += static_cast<long>(prev) * h + h;
    prev = h;
  }
  return n + prev + 1;
}

template <typename T = double>
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    if (spec_.hidden_sizes.empty()) throw ConfigError("MlpSpec: need at least one hidden layer");
    Rng rng(seed);
    int prev = kMlpInputs;
    std::vector<int> sizes = spec_.hidden_sizes;
    sizes.push_back(1);
    for (int h : sizes) {
      if (h < 1) throw ConfigError("MlpSpec: layer sizes must be >= 1");
      const double bound = 1.0 / std::sqrt(static_cast<double>(prev));
      params_.push_back(Tensor<T>::parameter({std::size_t(h), std::size_t(prev)},
                                             detail::uniform_init<T>(rng, std::size_t(h) * prev, bound)));
      params_.push_back(Tensor<T>::parameter({std::size_t(h)}, detail::uniform_init<T>(rng, h, bound)));
      prev = h;
    }
  }

  const MlpSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<Tensor<T>>& parameters() { return params_; }
  const std::vector<Tensor<T>>& parameters() const { return params_; }

  Mlp clone() const {
    Mlp c;
    c.spec_ = spec_;
    c.seed_ = seed_;
    for (const auto& t : params_) c.params_.push_back(Tensor<T>::parameter(t.shape(), {t.data().begin(), t.data().end()}));
    return c;
  }

  /// (N, 4) normalised coordinates -> (N, 1).
  Tensor<T> forward(const Tensor<T>& x) const {
    Tensor<T> h = x;
    const std::size_t L = params_.size() / 2;
    for (std::size_t l = 0; l < L; ++l) {
      h = linear(h, params_[2 * l], params_[2 * l + 1]);
      if (l + 1 < L) h = relu(h);
    }
    return h;
  }

  void zero_output_layer() {
    for (std::size_t i = params_.size() - 2; i < params_.size(); ++i)
      std::fill(params_[i].data().begin(), params_[i].data().end(), T(0));
  }

 private:
  MlpSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<Tensor<T>> params_;
};

/// Normalised MLP input row for a (tx, rx) pair on an n x n grid.
template <typename T>
std::array<T, kMlpInputs> mlp_features(Pixel tx, Pixel rx, int grid_size) {
  const T s = grid_size > 1 ? T(grid_size - 1) : T(1);
  return {T(tx.row) / s, T(tx.col) / s, T(rx.row) / s, T(rx.col) / s};
}

/// Raw (unclipped) MLP estimate for one transmitter/receiver pair.
template <typename T>
double forward_mlp(const Mlp<T>& model, Pixel tx, Pixel rx, int grid_size) {
  Grid probe(grid_size, grid_size);
  if (!probe.contains(tx) || !probe.contains(rx)) throw std::out_of_range("forward_mlp: coordinate outside grid");
  auto f = mlp_features<T>(tx, rx, grid_size);
  return static_cast<double>(model.forward(Tensor<T>::from({1, kMlpInputs}, {f.begin(), f.end()})).item());
}

/// Full radio map for one transmitter, clipped to [0, 1]: n^2 forward rows.
template <typename T>
Grid render_mlp(const Mlp<T>& model, Pixel tx, int grid_size) {
  const std::size_t n = static_cast<std::size_t>(grid_size) * grid_size;
  std::vector<T> rows;
  rows.reserve(n * kMlpInputs);
  for (int r = 0; r < grid_size; ++r)
    for (int c = 0; c < grid_size; ++c) {
      auto f = mlp_features<T>(tx, {r, c}, grid_size);
      rows.insert(rows.end(), f.begin(), f.end());
    }
  Tensor<T> out = model.forward(Tensor<T>::from({n, kMlpInputs}, std::move(rows)));
  Grid g(grid_size, grid_size);
  for (std::size_t i = 0; i < n; ++i) g.values()[i] = std::clamp(static_cast<double>(out.data()[i]), 0.0, 1.0);
  return g;
}

// ---------------------------------------------------------------------------
// Grid <-> tensor helpers.

/// Stacks grids as channels of a single (1, C, H, W) sample.
template <typename T>
std::vector<T> stack_channels(const std::vector<const Grid*>& channels) {
  std::vector<T> v;
  for (const Grid* g : channels)
    for (double x : g->values()) v.push_back(static_cast<T>(x));
  return v;
}

/// Channel `c` of sample `n`, clipped to [0, 1].
template <typename T>
Grid to_grid(const Tensor<T>& t, std::size_t n = 0, std::size_t c = 0, bool clip = true) {
  const std::size_t H = t.dim(2), W = t.dim(3);
  Grid g(static_cast<int>(H), static_cast<int>(W));
  const T* src = t.data().data() + (n * t.dim(1) + c) * H * W;
  for (std::size_t i = 0; i < H * W; ++i)
    g.values()[i] = clip ? std::clamp(static_cast<double>(src[i]), 0.0, 1.0) : static_cast<double>(src[i]);
  return g;
}

}  // namespace radiomap
