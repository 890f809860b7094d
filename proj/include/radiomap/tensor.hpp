#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "radiomap/parallel.hpp"

namespace radiomap {

using Shape = std::vector<std::size_t>;

inline std::size_t numel_of(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward;

  std::vector<T>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    return grad;
  }
};

}  // namespace detail

/// Handle to a node of the reverse-mode graph. Copies share the node.
template <typename T = double>
class Tensor {
 public:
  using Node = detail::Node<T>;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return from(shape, std::vector<T>(numel_of(shape), T(0)), requires_grad);
  }
  static Tensor full(Shape shape, T value) { return from(shape, std::vector<T>(numel_of(shape), value)); }
  static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false) {
    if (numel_of(shape) != data.size())
      throw ShapeError("tensor data size " + std::to_string(data.size()) + " does not match shape " +
                       shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }
  static Tensor parameter(Shape shape, std::vector<T> data) { return from(std::move(shape), std::move(data), true); }

  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  /// Empty until a backward pass reaches this tensor.
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> grad() { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }

  T item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return node_->data[0];
  }

  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), T(0)); }

  /// Same values, no graph history.
  Tensor detach() const { return from(shape(), node_->data, false); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

namespace detail {

/// Creates the output node; wires parents and the backward closure only when
/// some input requires a gradient.
template <typename T, typename MakeBackward>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::initializer_list<Tensor<T>> inputs,
                      MakeBackward&& make_backward) {
  auto out = std::make_shared<Node<T>>();
  out->shape = std::move(shape);
  out->data = std::move(data);
  for (const auto& in : inputs) out->requires_grad = out->requires_grad || in.requires_grad();
  if (out->requires_grad) {
    for (const auto& in : inputs) out->parents.push_back(in.node());
    out->backward = make_backward(out.get());
  }
  return Tensor<T>(std::move(out));
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

}  // namespace detail

/// Reverse sweep from a scalar. Gradients accumulate into every tensor that
/// requires one until zero_grad() is called.
template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) throw ShapeError("backward() needs a scalar, got shape " + shape_str(loss.shape()));
  if (!loss.requires_grad()) return;
  using Node = detail::Node<T>;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    n->ensure_grad();
    if (n->backward) n->backward();
  }
}

// ---------------------------------------------------------------------------
// Elementwise and reductions

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> d(a.numel());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] + b.data()[i];
  auto an = a.node(), bn = b.node();
  return detail::make_result<T>(a.shape(), std::move(d), {a, b}, [an, bn](detail::Node<T>* out) {
    return [an, bn, out] {
      for (auto* p : {an.get(), bn.get()})
        if (p->requires_grad) {
          auto& g = p->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i];
        }
    };
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.shape() == b.shape(), "mul: shape mismatch");
  std::vector<T> d(a.numel());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] * b.data()[i];
  auto an = a.node(), bn = b.node();
  return detail::make_result<T>(a.shape(), std::move(d), {a, b}, [an, bn](detail::Node<T>* out) {
    return [an, bn, out] {
      if (an->requires_grad) {
        auto& g = an->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i] * bn->data[i];
      }
      if (bn->requires_grad) {
        auto& g = bn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i] * an->data[i];
      }
    };
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  std::vector<T> d(a.data().begin(), a.data().end());
  for (auto& v : d) v *= s;
  auto an = a.node();
  return detail::make_result<T>(a.shape(), std::move(d), {a}, [an, s](detail::Node<T>* out) {
    return [an, out, s] {
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * out->grad[i];
    };
  });
}

/// Same data viewed with a new shape of equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  detail::require(numel_of(shape) == a.numel(),
                  "reshape: " + shape_str(a.shape()) + " cannot become " + shape_str(shape));
  auto an = a.node();
  return detail::make_result<T>(std::move(shape), std::vector<T>(a.data().begin(), a.data().end()), {a},
                                [an](detail::Node<T>* out) {
                                  return [an, out] {
                                    auto& g = an->ensure_grad();
                                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i];
                                  };
                                });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T s = std::accumulate(a.data().begin(), a.data().end(), T(0));
  auto an = a.node();
  return detail::make_result<T>({1}, {s}, {a}, [an](detail::Node<T>* out) {
    return [an, out] {
      auto& g = an->ensure_grad();
      for (auto& v : g) v += out->grad[0];
    };
  });
}

/// max(0, z); the subgradient at 0 is 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  std::vector<T> d(a.data().begin(), a.data().end());
  for (auto& v : d) v = v > T(0) ? v : T(0);
  auto an = a.node();
  return detail::make_result<T>(a.shape(), std::move(d), {a}, [an](detail::Node<T>* out) {
    return [an, out] {
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        if (an->data[i] > T(0)) g[i] += out->grad[i];
    };
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  std::vector<T> d(a.data().begin(), a.data().end());
  for (auto& v : d) v = T(1) / (T(1) + std::exp(-v));
  auto an = a.node();
  return detail::make_result<T>(a.shape(), std::move(d), {a}, [an](detail::Node<T>* out) {
    return [an, out] {
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out->grad[i] * out->data[i] * (T(1) - out->data[i]);
    };
  });
}

// ---------------------------------------------------------------------------
// Feature-map layers. Layout is (N, C, H, W), row-major.

enum class Padding { Zero, Circular };

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Column matrix (C*k*k) x (H*W) for one sample.
template <typename T>
void im2col(const T* x, std::size_t C, int H, int W, int k, Padding pad, T* cols) {
  const int p = k / 2;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  for (std::size_t c = 0; c < C; ++c)
    for (int ki = 0; ki < k; ++ki)
      for (int kj = 0; kj < k; ++kj) {
        T* row = cols + ((c * k + ki) * k + kj) * hw;
        const T* plane = x + c * hw;
        for (int y = 0; y < H; ++y) {
          int sy = y + ki - p;
          if (pad == Padding::Circular) sy = wrap(sy, H);
          for (int xx = 0; xx < W; ++xx) {
            int sx = xx + kj - p;
            if (pad == Padding::Circular) sx = wrap(sx, W);
            row[y * W + xx] = (sy >= 0 && sy < H && sx >= 0 && sx < W) ? plane[sy * W + sx] : T(0);
          }
        }
      }
}

template <typename T>
void col2im_add(const T* cols, std::size_t C, int H, int W, int k, Padding pad, T* dx) {
  const int p = k / 2;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  for (std::size_t c = 0; c < C; ++c)
    for (int ki = 0; ki < k; ++ki)
      for (int kj = 0; kj < k; ++kj) {
        const T* row = cols + ((c * k + ki) * k + kj) * hw;
        T* plane = dx + c * hw;
        for (int y = 0; y < H; ++y) {
          int sy = y + ki - p;
          if (pad == Padding::Circular) sy = wrap(sy, H);
          if (sy < 0 || sy >= H) continue;
          for (int xx = 0; xx < W; ++xx) {
            int sx = xx + kj - p;
            if (pad == Padding::Circular) sx = wrap(sx, W);
            if (sx < 0 || sx >= W) continue;
            plane[sy * W + sx] += row[y * W + xx];
          }
        }
      }
}

}  // namespace detail

/// Multi-channel convolution with "same" padding:
///   out[m] = sum_c in[c] * kernel[m, c] + bias[m].
/// Implemented as cross-correlation, the usual convention for learned kernels.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias,
                 Padding pad = Padding::Zero) {
  using detail::require;
  require(input.rank() == 4, "conv2d: input must be (N,C,H,W), got " + shape_str(input.shape()));
  require(kernels.rank() == 4, "conv2d: kernels must be (M,C,k,k)");
  const std::size_t N = input.dim(0), C = input.dim(1), M = kernels.dim(0);
  const int H = static_cast<int>(input.dim(2)), W = static_cast<int>(input.dim(3));
  const int k = static_cast<int>(kernels.dim(2));
  require(kernels.dim(1) == C, "conv2d: kernel expects " + std::to_string(kernels.dim(1)) + " input channels, got " +
                                   std::to_string(C));
  require(kernels.dim(3) == static_cast<std::size_t>(k) && k % 2 == 1, "conv2d: kernel must be square and odd");
  require(bias.numel() == M, "conv2d: bias size mismatch");

  const std::size_t hw = static_cast<std::size_t>(H) * W, ck = C * k * k;
  std::vector<T> out(N * M * hw);
  {
    Eigen::Map<const detail::RowMat<T>> Wm(kernels.data().data(), M, ck);
    parallel_for(N, [&](std::size_t n) {
      detail::RowMat<T> cols(ck, hw);
      detail::im2col(input.data().data() + n * C * hw, C, H, W, k, pad, cols.data());
      Eigen::Map<detail::RowMat<T>> o(out.data() + n * M * hw, M, hw);
      if (pad == Padding::Circular) {
        // Same operation sequence at every pixel, so circular shifts commute exactly.
        for (std::size_t m = 0; m < M; ++m) {
          T* row = o.data() + m * hw;
          std::fill(row, row + hw, T(0));
          for (std::size_t j = 0; j < ck; ++j) {
            const T w = Wm(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
            const T* c = cols.data() + j * hw;
            for (std::size_t p = 0; p < hw; ++p) row[p] += w * c[p];
          }
        }
      } else {
        o.noalias() = Wm * cols;
      }
      for (std::size_t m = 0; m < M; ++m) o.row(m).array() += bias.data()[m];
    });
  }

  auto xn = input.node(), wn = kernels.node(), bn = bias.node();
  return detail::make_result<T>(
      {N, M, static_cast<std::size_t>(H), static_cast<std::size_t>(W)}, std::move(out), {input, kernels, bias},
      [=](detail::Node<T>* o) {
        return [=] {
          Eigen::Map<const detail::RowMat<T>> Wm(wn->data.data(), M, ck);
          std::vector<detail::RowMat<T>> dW(wn->requires_grad ? N : 0);
          T* dx = xn->requires_grad ? xn->ensure_grad().data() : nullptr;
          parallel_for(N, [&](std::size_t n) {
            Eigen::Map<const detail::RowMat<T>> go(o->grad.data() + n * M * hw, M, hw);
            if (wn->requires_grad) {
              detail::RowMat<T> cols(ck, hw);
              detail::im2col(xn->data.data() + n * C * hw, C, H, W, k, pad, cols.data());
              dW[n].noalias() = go * cols.transpose();
            }
            if (dx) {
              detail::RowMat<T> dcols = Wm.transpose() * go;
              detail::col2im_add(dcols.data(), C, H, W, k, pad, dx + n * C * hw);
            }
          });
          if (wn->requires_grad) {
            Eigen::Map<detail::RowMat<T>> gw(wn->ensure_grad().data(), M, ck);
            for (std::size_t n = 0; n < N; ++n) gw += dW[n];
          }
          if (bn->requires_grad) {
            auto& gb = bn->ensure_grad();
            for (std::size_t n = 0; n < N; ++n)
              for (std::size_t m = 0; m < M; ++m) {
                const T* g = o->grad.data() + (n * M + m) * hw;
                gb[m] += std::accumulate(g, g + hw, T(0));
              }
          }
        };
      });
}

/// 2x2 max pooling. Ties go to the first entry in row-major scan order.
template <typename T>
Tensor<T> maxpool2(const Tensor<T>& a) {
  detail::require(a.rank() == 4, "maxpool2: expected (N,C,H,W)");
  const std::size_t NC = a.dim(0) * a.dim(1), H = a.dim(2), W = a.dim(3);
  detail::require(H % 2 == 0 && W % 2 == 0, "maxpool2: odd spatial size " + shape_str(a.shape()));
  const std::size_t h = H / 2, w = W / 2;
  std::vector<T> d(NC * h * w);
  std::vector<std::size_t> argmax(d.size());
  const auto& x = a.data();
  for (std::size_t p = 0; p < NC; ++p)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        std::size_t base = p * H * W, best = base + 2 * i * W + 2 * j;
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) {
            std::size_t idx = base + (2 * i + di) * W + 2 * j + dj;
            if (x[idx] > x[best]) best = idx;
          }
        std::size_t o = (p * h + i) * w + j;
        d[o] = x[best];
        argmax[o] = best;
      }
  auto an = a.node();
  return detail::make_result<T>({a.dim(0), a.dim(1), h, w}, std::move(d), {a},
                                [an, argmax = std::move(argmax)](detail::Node<T>* out) mutable {
                                  return [an, out, argmax = std::move(argmax)] {
                                    auto& g = an->ensure_grad();
                                    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += out->grad[o];
                                  };
                                });
}

/// Nearest-neighbour 2x upsampling.
template <typename T>
Tensor<T> upsample2(const Tensor<T>& a) {
  detail::require(a.rank() == 4, "upsample2: expected (N,C,H,W)");
  const std::size_t NC = a.dim(0) * a.dim(1), H = a.dim(2), W = a.dim(3);
  std::vector<T> d(NC * 4 * H * W);
  for (std::size_t p = 0; p < NC; ++p)
    for (std::size_t i = 0; i < 2 * H; ++i)
      for (std::size_t j = 0; j < 2 * W; ++j) d[(p * 2 * H + i) * 2 * W + j] = a.data()[(p * H + i / 2) * W + j / 2];
  auto an = a.node();
  return detail::make_result<T>({a.dim(0), a.dim(1), 2 * H, 2 * W}, std::move(d), {a}, [=](detail::Node<T>* out) {
    return [=] {
      auto& g = an->ensure_grad();
      for (std::size_t p = 0; p < NC; ++p)
        for (std::size_t i = 0; i < 2 * H; ++i)
          for (std::size_t j = 0; j < 2 * W; ++j) g[(p * H + i / 2) * W + j / 2] += out->grad[(p * 2 * H + i) * 2 * W + j];
    };
  });
}

/// Stacks b's channels after a's.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.rank() == 4 && b.rank() == 4, "concat_channels: expected (N,C,H,W)");
  detail::require(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
                  "concat_channels: spatial mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t N = a.dim(0), ca = a.dim(1), cb = b.dim(1), hw = a.dim(2) * a.dim(3);
  std::vector<T> d(N * (ca + cb) * hw);
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(a.data().data() + n * ca * hw, ca * hw, d.data() + n * (ca + cb) * hw);
    std::copy_n(b.data().data() + n * cb * hw, cb * hw, d.data() + (n * (ca + cb) + ca) * hw);
  }
  auto an = a.node(), bn = b.node();
  return detail::make_result<T>({N, ca + cb, a.dim(2), a.dim(3)}, std::move(d), {a, b}, [=](detail::Node<T>* out) {
    return [=] {
      for (std::size_t n = 0; n < N; ++n) {
        const T* g = out->grad.data() + n * (ca + cb) * hw;
        if (an->requires_grad) {
          T* ga = an->ensure_grad().data() + n * ca * hw;
          for (std::size_t i = 0; i < ca * hw; ++i) ga[i] += g[i];
        }
        if (bn->requires_grad) {
          T* gb = bn->ensure_grad().data() + n * cb * hw;
          for (std::size_t i = 0; i < cb * hw; ++i) gb[i] += g[ca * hw + i];
        }
      }
    };
  });
}

/// Channels [begin, begin + count).
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& a, std::size_t begin, std::size_t count) {
  detail::require(a.rank() == 4 && begin + count <= a.dim(1), "slice_channels: out of range");
  const std::size_t N = a.dim(0), C = a.dim(1), hw = a.dim(2) * a.dim(3);
  std::vector<T> d(N * count * hw);
  for (std::size_t n = 0; n < N; ++n)
    std::copy_n(a.data().data() + (n * C + begin) * hw, count * hw, d.data() + n * count * hw);
  auto an = a.node();
  return detail::make_result<T>({N, count, a.dim(2), a.dim(3)}, std::move(d), {a}, [=](detail::Node<T>* out) {
    return [=] {
      auto& g = an->ensure_grad();
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < count * hw; ++i) g[(n * C + begin) * hw + i] += out->grad[n * count * hw + i];
    };
  });
}

/// Dense layer: x (N, in) times weights (out, in)^T plus bias (out).
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  detail::require(x.rank() == 2 && weights.rank() == 2 && x.dim(1) == weights.dim(1),
                  "linear: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(weights.shape()));
  detail::require(bias.numel() == weights.dim(0), "linear: bias size mismatch");
  const std::size_t N = x.dim(0), I = x.dim(1), O = weights.dim(0);
  std::vector<T> d(N * O);
  Eigen::Map<const detail::RowMat<T>> X(x.data().data(), N, I), Wm(weights.data().data(), O, I);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> B(bias.data().data(), O);
  Eigen::Map<detail::RowMat<T>> Y(d.data(), N, O);
  Y.noalias() = X * Wm.transpose();
  Y.rowwise() += B;
  auto xn = x.node(), wn = weights.node(), bn = bias.node();
  return detail::make_result<T>({N, O}, std::move(d), {x, weights, bias}, [=](detail::Node<T>* out) {
    return [=] {
      Eigen::Map<const detail::RowMat<T>> G(out->grad.data(), N, O);
      Eigen::Map<const detail::RowMat<T>> X(xn->data.data(), N, I), Wm(wn->data.data(), O, I);
      if (xn->requires_grad) Eigen::Map<detail::RowMat<T>>(xn->ensure_grad().data(), N, I).noalias() += G * Wm;
      if (wn->requires_grad) Eigen::Map<detail::RowMat<T>>(wn->ensure_grad().data(), O, I).noalias() += G.transpose() * X;
      if (bn->requires_grad) {
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(bn->ensure_grad().data(), O);
        gb += G.colwise().sum();
      }
    };
  });
}

// ---------------------------------------------------------------------------
// Losses. Targets and weights are treated as constants.

template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  detail::require(pred.shape() == target.shape(),
                  "mse_loss: shape mismatch " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
  const std::size_t n = pred.numel();
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    T e = pred.data()[i] - target.data()[i];
    s += e * e;
  }
  auto pn = pred.node(), tn = target.node();
  return detail::make_result<T>({1}, {s / T(n)}, {pred}, [=](detail::Node<T>* out) {
    return [=] {
      auto& g = pn->ensure_grad();
      const T c = T(2) * out->grad[0] / T(n);
      for (std::size_t i = 0; i < n; ++i) g[i] += c * (pn->data[i] - tn->data[i]);
    };
  });
}

/// sum_i w_i (pred_i - target_i)^2. Zero weight marks an unmeasured pixel.
template <typename T>
Tensor<T> weighted_mse_loss(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>& weights) {
  detail::require(pred.shape() == target.shape() && pred.shape() == weights.shape(), "weighted_mse_loss: shape mismatch");
  const std::size_t n = pred.numel();
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T w = weights.data()[i];
    if (w < T(0)) throw std::invalid_argument("weighted_mse_loss: negative weight");
    T e = pred.data()[i] - target.data()[i];
    s += w * e * e;
  }
  auto pn = pred.node(), tn = target.node(), wn = weights.node();
  return detail::make_result<T>({1}, {s}, {pred}, [=](detail::Node<T>* out) {
    return [=] {
      auto& g = pn->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) g[i] += T(2) * out->grad[0] * wn->data[i] * (pn->data[i] - tn->data[i]);
    };
  });
}

}  // namespace radiomap
