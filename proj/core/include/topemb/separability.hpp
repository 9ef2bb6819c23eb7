#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topemb/embed_store.hpp"
#include "topemb/matrix.hpp"

namespace topemb {

struct LinearModel {
  std::vector<double> w;
  double b = 0.0;

  double decision(std::span<const double> x) const { return dot(w, x) + b; }
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

struct SvmParams {
  double lambda = 1e-4;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

// Pegasos: stochastic subgradient descent on
//   lambda/2 |w|^2 + mean(max(0, 1 - y (w.x + b)))
// with step 1/(lambda t). The bias is learned as the weight of a constant
// feature. Labels are +1 / -1.
LinearModel fit_linear_svm(const Matrix& x, std::span<const int> y, const SvmParams& params = {});

struct ClassifierReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::string positive_class;
  std::string negative_class;
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
  double train_fraction = 0.8;
  SvmParams params;
};

// Scores predictions of `model` on (x, y) w.r.t. the +1 class.
ClassifierReport score_classifier(const LinearModel& model, const Matrix& x, std::span<const int> y);

// Trains on a seeded shuffled split of `x` and scores the held-out part.
ClassifierReport split_and_score(const Matrix& x, std::span<const int> y, double train_fraction,
                                 const SvmParams& params);

// Labels = modality, positive class = setA's modality. Needs N ≥ 10.
ClassifierReport modality_separability(const PairedDataset& ds, double train_fraction = 0.8,
                                       const SvmParams& params = {});

struct PcaResult {
  Matrix projection;          // N×k
  Matrix basis;               // D×k, orthonormal columns
  std::vector<double> mean;   // D
  std::vector<double> sigma;  // full descending covariance spectrum
  double explained_variance = 0.0;
};

PcaResult pca_project(const Matrix& points, std::size_t k);
PcaResult pca_project(const EmbeddingSet& set, std::size_t k);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;

  // Equal-width bins over [lo, hi]; out-of-range values clamp to the end bins.
  static Histogram build(std::span<const double> values, double lo, double hi, std::size_t bins);
  std::size_t total() const;
};

// Columns: bin_left,bin_right,count
void write_histogram_csv(std::ostream& out, const Histogram& h);
Histogram read_histogram_csv(std::istream& in);

struct GapReport {
  Histogram histogram;
  std::vector<double> cosines;  // per pair
  double mean_cosine = 0.0;
  double centroid_gap = 0.0;
};

GapReport paired_cosine_distribution(const PairedDataset& ds, std::size_t bins = 40);

struct NearestReference {
  std::vector<double> similarities;  // per query: max cosine over the reference
  Histogram histogram;
};

NearestReference nearest_reference_similarity(const EmbeddingSet& query,
                                              const EmbeddingSet& reference,
                                              std::size_t bins = 40);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

std::string classifier_report_json(const ClassifierReport& r);
ClassifierReport parse_classifier_report_json(const std::string& text);
std::string gap_report_json(const GapReport& g);

}  // namespace topemb
