#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "kpinn/core/rng.hpp"
#include "kpinn/core/tensor.hpp"
#include "kpinn/network/mlp.hpp"

namespace kpinn::testing {

// Glorot net with small random biases, so bias gradients are exercised too.
inline MlpParams random_net(const std::vector<std::size_t>& dims, Activation act, std::uint64_t seed,
                            double bias_scale = 0.3) {
  std::vector<Activation> acts(dims.size() - 1, act);
  acts.back() = Activation::None;
  MlpParams p = init_glorot(dims, acts, seed);
  Rng rng(derive_seed(seed, "bias"));
  for (auto& layer : p.layers) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = bias_scale * rng.uniform(-1.0, 1.0);
  }
  return p;
}

inline Tensor random_points(std::size_t n, std::size_t d, std::uint64_t seed, double lo = 0.05, double hi = 0.95) {
  Rng rng(seed);
  Tensor x({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.uniform(lo, hi);
  }
  return x;
}

inline Tensor single_point(std::vector<double> x) {
  const std::size_t d = x.size();
  return Tensor({1, d}, std::move(x));
}

}  // namespace kpinn::testing
