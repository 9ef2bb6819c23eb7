#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topemb/clustering.hpp"
#include "topemb/embed_store.hpp"
#include "topemb/spectra.hpp"

namespace topemb {

enum class Direction { AtoB, BtoA };

Direction parse_direction(std::string_view name);  // "a2b" | "b2a"
std::string_view to_string(Direction d);

struct RetrievalReport {
  Direction direction = Direction::AtoB;
  std::vector<std::size_t> ks;     // ascending
  std::vector<double> accuracy;    // parallel to ks
  std::vector<std::size_t> ranks;  // 0-based rank of each query's true partner
  std::size_t n_queries = 0;
  std::size_t pool_size = 0;

  bool hit(std::size_t query, std::size_t k) const { return ranks[query] < k; }
  double accuracy_at(std::size_t k) const;
};

// Ranks all N targets by cosine similarity (descending, ties by ascending
// index) for every query. Throws KTooLarge if any k exceeds N.
RetrievalReport cross_modal_retrieve(const PairedDataset& ds, Direction direction,
                                     std::span<const std::size_t> ks);

struct ClusterTop1Row {
  int cluster = 0;
  std::size_t n = 0;  // queries whose true target lies in the cluster
  std::size_t hits = 0;
  double top1 = 0.0;
  bool flagged = false;  // n below the minimum
};

struct PerClusterTop1 {
  std::vector<ClusterTop1Row> rows;
  std::size_t noise_queries = 0;
  std::size_t noise_hits = 0;
  std::size_t min_queries = 5;
};

// Top-1 accuracy restricted to queries whose true target falls in each
// non-noise cluster of the target modality.
PerClusterTop1 per_cluster_top1(const RetrievalReport& report, const Clustering& target_clustering,
                                std::size_t min_queries = 5);
PerClusterTop1 per_cluster_top1(const PairedDataset& ds, Direction direction,
                                const Clustering& target_clustering, std::size_t min_queries = 5);

struct CorrelationRow {
  int cluster = 0;
  std::size_t n = 0;
  double auc = 0.0;
  double top1 = 0.0;
};

struct ClusterAccuracyCorrelation {
  std::vector<CorrelationRow> rows;
  std::vector<int> excluded;
  double pearson_r = 0.0;
  std::size_t n_clusters_used = 0;
  bool log_auc = false;
};

double pearson(std::span<const double> x, std::span<const double> y);

// Joins rows by cluster id (spectrum source = cluster id). Throws
// TooFewClusters when fewer than 3 clusters survive the exclusions.
ClusterAccuracyCorrelation auc_accuracy_correlation(const PerClusterTop1& top1,
                                                    std::span<const SpectrumReport> spectra,
                                                    bool use_log_auc = false);

std::string retrieval_reports_json(std::span<const RetrievalReport> reports);
std::string correlation_json(const ClusterAccuracyCorrelation& c);
// Columns: cluster,n,auc,top1
void write_correlation_csv(std::ostream& out, const ClusterAccuracyCorrelation& c);
std::vector<CorrelationRow> read_correlation_csv(std::istream& in);

}  // namespace topemb
