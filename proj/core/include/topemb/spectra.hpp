#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topemb/clustering.hpp"
#include "topemb/embed_store.hpp"
#include "topemb/matrix.hpp"

namespace topemb {

inline constexpr double kLog10Floor = -12.0;
inline constexpr double kDefaultEffectiveDimEpsilon = 1e-3;
inline constexpr int kJacobiMaxSweeps = 100;

// Sample covariance (1/(N-1) normalization). Throws TooFewPoints for N < 2.
Matrix covariance(const Matrix& points);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Eigenvector signs are fixed so that the largest
// magnitude component of each column is positive.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps = kJacobiMaxSweeps);

struct SpectrumReport {
  std::string source;
  std::size_t n_points = 0;
  std::vector<double> sigma;        // descending, ≥ 0
  std::vector<double> log10_sigma;  // clamped below at kLog10Floor
  double epsilon = kDefaultEffectiveDimEpsilon;
  std::size_t effective_dim = 0;
  double auc = 0.0;      // mean of sigma/sigma[0]
  double auc_log = 0.0;  // same on the floored log10 scale
  bool degenerate = false;  // too few points for a meaningful spectrum
};

SpectrumReport singular_spectrum(const Matrix& cov, std::string source = {},
                                 std::size_t n_points = 0,
                                 double epsilon = kDefaultEffectiveDimEpsilon);

// covariance() followed by singular_spectrum().
SpectrumReport spectrum_of_points(const Matrix& points, std::string source = {},
                                  double epsilon = kDefaultEffectiveDimEpsilon);

double auc_of_spectrum(std::span<const double> sigma);
double auc_log_of_spectrum(std::span<const double> sigma);
std::size_t effective_dim(std::span<const double> sigma,
                          double epsilon = kDefaultEffectiveDimEpsilon);
double log10_floored(double value);

struct PerClusterOptions {
  std::size_t min_points = 3;
  double epsilon = kDefaultEffectiveDimEpsilon;
};

// One report per non-noise cluster, in cluster-id order; source is the
// cluster id. Clusters below min_points are still reported, flagged degenerate.
std::vector<SpectrumReport> per_cluster_spectra(const EmbeddingSet& set,
                                                const Clustering& clustering,
                                                const PerClusterOptions& options = {});

// CSV columns: source,k,sigma,log10_sigma,effective_dim,auc,n_points.
// Each report is followed by a summary row with k = "summary".
void write_spectra_csv(std::ostream& out, std::span<const SpectrumReport> reports);
std::vector<SpectrumReport> read_spectra_csv(std::istream& in);

}  // namespace topemb
