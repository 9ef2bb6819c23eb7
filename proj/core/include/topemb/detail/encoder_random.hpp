#pragma once

#include <cmath>
#include <random>

namespace topemb {

template <typename Rng>
Encoder Encoder::random(std::size_t in, std::size_t hidden, std::size_t out, double bias_scale, Rng& rng) {
  Encoder e(in, hidden, out);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto& p = e.params_;
  std::size_t k = 0;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  for (std::size_t i = 0; i < hidden * in; ++i) p[k++] = s1 * normal(rng);
  for (std::size_t i = 0; i < hidden; ++i) p[k++] = 0.1 * normal(rng);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t i = 0; i < out * hidden; ++i) p[k++] = s2 * normal(rng);
  for (std::size_t i = 0; i < out; ++i) p[k++] = bias_scale * normal(rng);
  return e;
}

}  // namespace topemb
