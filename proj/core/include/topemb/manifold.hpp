#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topemb/clustering.hpp"
#include "topemb/embed_store.hpp"
#include "topemb/matrix.hpp"

namespace topemb {

enum class OutputSpace { Plane, Sphere };

OutputSpace parse_output_space(std::string_view name);  // "plane" | "haversine"
std::string_view to_string(OutputSpace space);

// Exact k nearest neighbours (self excluded), ascending distance, ties by index.
struct KnnGraph {
  std::size_t n_points = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;  // n_points × k
  std::vector<double> distances;     // n_points × k

  std::span<const std::size_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
  std::span<const double> neighbor_distances(std::size_t i) const { return {distances.data() + i * k, k}; }
};

KnnGraph knn_graph(const Matrix& points, std::size_t k, Metric metric = Metric::Cosine);

struct SmoothKnn {
  double rho = 0.0;
  double sigma = 1.0;
  bool converged = true;  // false: target log2(k) was not reached
};

inline constexpr int kSmoothKnnIterations = 64;
inline constexpr double kSmoothKnnTolerance = 1e-5;

// Finds sigma with sum_j exp(-max(0, d_j - rho) / sigma) = log2(k), where
// rho is the smallest positive distance. Needs k ≥ 2 ascending distances.
SmoothKnn smooth_knn(std::span<const double> distances);

struct FuzzyEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

struct FuzzyGraph {
  std::size_t n_points = 0;
  std::vector<FuzzyEdge> directed;   // i -> j membership strengths
  std::vector<FuzzyEdge> symmetric;  // i < j, w = w_ij + w_ji - w_ij w_ji
  std::vector<double> rho;
  std::vector<double> sigma;
  std::vector<char> sigma_flagged;
};

FuzzyGraph fuzzy_graph(const KnnGraph& knn);
FuzzyGraph fuzzy_graph(const Matrix& points, std::size_t k, Metric metric = Metric::Cosine);

struct CurveParams {
  double a = 0.0;
  double b = 0.0;
};

// Least-squares fit of 1/(1 + a d^(2b)) to the piecewise target
// {1 for d < min_dist, exp(-(d - min_dist)/spread) otherwise} on [0, 3 spread].
CurveParams fit_ab(double min_dist, double spread = 1.0);

double low_dim_similarity(double distance, CurveParams curve);

struct LatLon {
  double lat = 0.0;  // [-pi/2, pi/2]
  double lon = 0.0;  // [-pi, pi)
};

std::array<double, 3> to_unit_vector(LatLon p);
LatLon from_unit_vector(const std::array<double, 3>& v);
LatLon antipode(LatLon p);
// Great-circle angle between two points on the unit sphere.
double haversine(LatLon p, LatLon q);

// Per-pair cross-entropy terms of the layout objective, with their gradient
// with respect to the first point. Attractive: -log q(d); repulsive:
// -log(1 - q(d)), q(d) = 1 / (1 + a d^(2b)). `eps` regularizes the repulsive
// denominator the way the optimizer does; eps = 0 is the exact gradient.
struct PairTerm {
  double value = 0.0;
  std::array<double, 2> grad{};
};

PairTerm planar_attractive(std::array<double, 2> p, std::array<double, 2> q, CurveParams c);
PairTerm planar_repulsive(std::array<double, 2> p, std::array<double, 2> q, CurveParams c,
                          double eps = 0.0);
// Gradients are with respect to (lat, lon) of p.
PairTerm sphere_attractive(LatLon p, LatLon q, CurveParams c);
PairTerm sphere_repulsive(LatLon p, LatLon q, CurveParams c, double eps = 0.0);

struct LayoutParams {
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  std::size_t n_epochs = 200;
  std::uint64_t seed = 0;
  double negative_sample_rate = 5.0;
  double learning_rate = 1.0;
  OutputSpace space = OutputSpace::Plane;
  Metric metric = Metric::Cosine;
};

struct Layout {
  OutputSpace space = OutputSpace::Plane;
  Matrix coords;  // N×2: (x, y) or (lat, lon)
  LayoutParams params;
  CurveParams curve;

  std::size_t size() const noexcept { return coords.rows(); }
  // Euclidean coordinates: (x, y) for the plane, the 3-D unit vector for the sphere.
  Matrix euclidean() const;
};

// Seeded uniform initialisation on the target space.
Layout initial_layout(std::size_t n_points, const LayoutParams& params);

// Edge-sampled SGD on the fuzzy cross-entropy. Deterministic given the seed.
Layout layout(const FuzzyGraph& graph, const LayoutParams& params);

// knn_graph + fuzzy_graph + layout.
Layout umap(const Matrix& points, const LayoutParams& params);

// Sampled cross-entropy estimate: each symmetric edge contributes its
// attractive term plus `negatives` seeded repulsive pairs, all weighted by
// the edge weight.
double layout_loss(const FuzzyGraph& graph, const Layout& layout, std::uint64_t seed,
                   std::size_t negatives = 5);

enum class PairProjectionMethod { Pca2, Layout };

struct PairProjection {
  Matrix a;  // N×2
  Matrix b;  // N×2
  double mean_segment_length = 0.0;
};

PairProjection pair_line_projection(const PairedDataset& ds, PairProjectionMethod method,
                                    const LayoutParams& params = {});

struct AblationCell {
  std::size_t n_neighbors = 0;
  double min_dist = 0.0;
  Layout layout;
  double separation = 0.0;  // held-out linear SVM accuracy on the layout coordinates
};

// One layout per (n_neighbors, min_dist) of a set whose rows carry modality tags.
std::vector<AblationCell> ablation_grid(const EmbeddingSet& set,
                                        std::span<const std::size_t> k_values,
                                        std::span<const double> min_dist_values,
                                        const LayoutParams& base);

// Modality separation of a layout: linear SVM on standardised coordinates.
double layout_separation(const Layout& layout, const EmbeddingSet& set, std::uint64_t seed);

// Columns: id,modality,x,y (plane) or id,modality,lat,lon (sphere).
void write_layout_csv(std::ostream& out, const Layout& layout, const EmbeddingSet& set);

struct LayoutTable {
  OutputSpace space = OutputSpace::Plane;
  std::vector<std::int64_t> ids;
  std::vector<std::string> modality;
  Matrix coords;
};
LayoutTable read_layout_csv(std::istream& in);

}  // namespace topemb
