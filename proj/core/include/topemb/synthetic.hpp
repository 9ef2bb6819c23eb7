#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topemb/embed_store.hpp"

namespace topemb {

struct PlantedClusters {
  PairedDataset data;
  std::vector<int> labels;  // ground-truth cluster per pair
};

struct PlantedParams {
  std::vector<std::size_t> intrinsic_dims = {2, 4, 8, 12, 16};
  std::size_t points_per_cluster = 60;
  std::size_t dim = 32;
  double center_scale = 4.0;  // norm of each cluster center before normalization
  double spread = 1.0;        // std of the in-subspace coordinates
  double noise = 0.15;        // isotropic noise added independently per modality
  std::uint64_t seed = 0;
};

// Cluster c lives on a random intrinsic_dims[c]-dimensional subspace around
// its own center; both modalities see the same latent point plus independent
// isotropic noise. Rows are unit-normalized.
PlantedClusters planted_clusters(const PlantedParams& params);

}  // namespace topemb
