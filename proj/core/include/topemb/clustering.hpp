#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topemb/embed_store.hpp"
#include "topemb/matrix.hpp"

namespace topemb {

enum class Metric { Cosine, Euclidean };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric);

// Cosine distance is 1 - <a,b> (inputs assumed unit norm), clamped at 0.
double distance(std::span<const double> a, std::span<const double> b, Metric metric);

inline constexpr int kNoise = -1;

// Distance from each point to its k-th nearest other point. Throws
// KTooLarge unless 1 <= k < N.
std::vector<double> core_distances(const Matrix& points, std::size_t k, Metric metric);

struct WeightedEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;
};

// Orders edges by (weight, a, b); the MST and the hierarchy both use it.
bool edge_less(const WeightedEdge& x, const WeightedEdge& y);

// Prim's algorithm on the implicit complete graph weighted by
// max(core[a], core[b], d(a, b)). Returned edges are sorted by edge_less.
std::vector<WeightedEdge> mutual_reachability_mst(const Matrix& points,
                                                  std::span<const double> core,
                                                  Metric metric);

// A row of the condensed tree. Children are either points (ids 0..N-1) or
// condensed clusters (ids into the cluster arrays, root = 0).
struct CondensedEdge {
  std::size_t parent = 0;
  std::size_t child = 0;
  bool child_is_cluster = false;
  double lambda_birth = 0.0;  // point: parent's birth; cluster: split level
  double lambda_death = 0.0;  // point: level it falls out; cluster: level it dissolves
  std::size_t child_size = 1;
};

struct CondensedTree {
  std::vector<CondensedEdge> edges;
  // Indexed by condensed cluster id; parent of the root is -1.
  std::vector<std::ptrdiff_t> cluster_parent;
  std::vector<double> cluster_birth;
  std::vector<double> cluster_stability;
  std::vector<std::size_t> cluster_size;
  bool root_eligible = false;
  std::vector<std::size_t> selected;  // condensed ids chosen by excess of mass

  // Points in the subtree of a condensed cluster, ascending.
  std::vector<std::size_t> members(std::size_t cluster) const;
};

struct ClusteringParams {
  std::size_t min_cluster_size = 15;
  std::size_t min_samples = 0;  // 0: same as min_cluster_size
  Metric metric = Metric::Cosine;
  // Lets the root compete in the selection. Regardless of this flag the
  // root is eligible when every point leaves it at the same density level
  // (e.g. all points coincide).
  bool allow_single_cluster = false;
  double lambda_max = 1e12;

  std::size_t effective_min_samples() const {
    return min_samples == 0 ? min_cluster_size : min_samples;
  }
};

struct Clustering {
  std::vector<int> labels;  // kNoise or 0..n_clusters-1
  std::size_t n_clusters = 0;
  std::vector<double> stabilities;  // by final label
  ClusteringParams params;
  CondensedTree tree;

  std::vector<std::size_t> sizes() const;
};

// Builds a clustering directly from labels (e.g. ground truth); stabilities
// are zero and the tree is empty.
Clustering clustering_from_labels(std::vector<int> labels);

// Single-linkage hierarchy over the MST, condensed at min_cluster_size,
// then excess-of-mass selection. Final labels are numbered by the smallest
// member index of each selected cluster.
Clustering extract_clusters(std::span<const WeightedEdge> mst, std::size_t n_points,
                            const ClusteringParams& params);

Clustering cluster(const Matrix& points, const ClusteringParams& params);
Clustering cluster(const EmbeddingSet& set, const ClusteringParams& params);

// CSV columns: id,label
void write_clustering_csv(std::ostream& out, const Clustering& c, std::span<const std::int64_t> ids);
std::vector<int> read_clustering_csv(std::istream& in);
// {n_clusters, n_noise, sizes, stabilities, params}
std::string clustering_summary_json(const Clustering& c);

}  // namespace topemb
