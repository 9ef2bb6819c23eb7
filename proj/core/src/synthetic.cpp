#include "topemb/synthetic.hpp"

#include <cmath>
#include <random>

#include "topemb/error.hpp"

namespace topemb {

namespace {

// Gram-Schmidt on Gaussian columns; returns k orthonormal rows of length d.
Matrix random_orthonormal_rows(std::size_t k, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix basis(k, d);
  for (std::size_t r = 0; r < k; ++r) {
    for (;;) {
      auto row = basis.row(r);
      for (double& v : row) v = normal(rng);
      for (std::size_t q = 0; q < r; ++q) {
        const double proj = dot(row, basis.row(q));
        for (std::size_t c = 0; c < d; ++c) row[c] -= proj * basis(q, c);
      }
      const double n = norm(row);
      if (n > 1e-8) {
        for (double& v : row) v /= n;
        break;
      }
    }
  }
  return basis;
}

}  // namespace

PlantedClusters planted_clusters(const PlantedParams& p) {
  if (p.intrinsic_dims.empty() || p.points_per_cluster < 1 || p.dim < 2)
    throw Error(ErrorCode::InvalidArgument, "planted clusters need clusters, points and dim >= 2");
  for (std::size_t k : p.intrinsic_dims)
    if (k < 1 || k > p.dim) throw Error(ErrorCode::InvalidArgument, "intrinsic dim must be in [1, dim]");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = p.intrinsic_dims.size() * p.points_per_cluster;
  Matrix a(n, p.dim), b(n, p.dim);
  PlantedClusters out;
  out.labels.reserve(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < p.intrinsic_dims.size(); ++c) {
    std::vector<double> center(p.dim);
    for (double& v : center) v = normal(rng);
    const double cn = norm(center);
    for (double& v : center) v *= p.center_scale / cn;
    const std::size_t k = p.intrinsic_dims[c];
    const Matrix basis = random_orthonormal_rows(k, p.dim, rng);
    std::vector<double> latent(p.dim);
    for (std::size_t i = 0; i < p.points_per_cluster; ++i, ++row) {
      latent = center;
      for (std::size_t j = 0; j < k; ++j) {
        const double z = p.spread * normal(rng);
        for (std::size_t d = 0; d < p.dim; ++d) latent[d] += z * basis(j, d);
      }
      for (std::size_t d = 0; d < p.dim; ++d) {
        a(row, d) = latent[d] + p.noise * normal(rng);
        b(row, d) = latent[d] + p.noise * normal(rng);
      }
      out.labels.push_back(static_cast<int>(c));
    }
  }
  normalize_rows(a);
  normalize_rows(b);
  round_to_storage(a);
  round_to_storage(b);
  out.data = make_paired(make_set(std::move(a), "image"), make_set(std::move(b), "text"), "planted");
  return out;
}

}  // namespace topemb
