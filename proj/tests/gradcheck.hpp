#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "radiomap/random.hpp"
#include "radiomap/tensor.hpp"

namespace radiomap::testing {

/// Central finite differences against backward(). Returns the largest
/// |analytic - numeric| / max(|analytic|, |numeric|, floor) over all checked
/// entries. At most `max_entries` entries per tensor are probed.
inline double gradcheck(std::vector<Tensor<double>> wrt, const std::function<Tensor<double>()>& loss_fn,
                        double step = 1e-5, std::size_t max_entries = 64, double floor = 1e-6) {
  for (auto& t : wrt) t.zero_grad();
  Tensor<double> loss = loss_fn();
  backward(loss);
  double worst = 0.0;
  for (auto& t : wrt) {
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    if (analytic.empty()) analytic.assign(t.numel(), 0.0);
    const std::size_t n = t.numel();
    const std::size_t stride = std::max<std::size_t>(1, n / max_entries);
    for (std::size_t i = 0; i < n; i += stride) {
      const double orig = t.data()[i];
      t.data()[i] = orig + step;
      const double up = loss_fn().item();
      t.data()[i] = orig - step;
      const double down = loss_fn().item();
      t.data()[i] = orig;
      const double numeric = (up - down) / (2 * step);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

inline Tensor<double> random_tensor(Rng& rng, Shape shape, bool requires_grad = true, double lo = -1, double hi = 1) {
  std::vector<double> v(numel_of(shape));
  for (auto& x : v) x = uniform_real(rng, lo, hi);
  return Tensor<double>::from(std::move(shape), std::move(v), requires_grad);
}

}  // namespace radiomap::testing
