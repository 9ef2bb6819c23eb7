#include "topemb/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"
#include "topemb/parallel.hpp"

namespace topemb {

Direction parse_direction(std::string_view name) {
  if (name == "a2b") return Direction::AtoB;
  if (name == "b2a") return Direction::BtoA;
  throw Error(ErrorCode::InvalidArgument, "unknown direction '" + std::string(name) + "'");
}

std::string_view to_string(Direction d) { return d == Direction::AtoB ? "a2b" : "b2a"; }

double RetrievalReport::accuracy_at(std::size_t k) const {
  std::size_t hits = 0;
  for (std::size_t r : ranks) hits += r < k ? 1 : 0;
  return n_queries ? static_cast<double>(hits) / static_cast<double>(n_queries) : 0.0;
}

RetrievalReport cross_modal_retrieve(const PairedDataset& ds, Direction direction,
                                     std::span<const std::size_t> ks) {
  const std::size_t n = ds.count();
  const Matrix& src = direction == Direction::AtoB ? ds.a.vectors : ds.b.vectors;
  const Matrix& tgt = direction == Direction::AtoB ? ds.b.vectors : ds.a.vectors;
  RetrievalReport r;
  r.direction = direction;
  r.ks.assign(ks.begin(), ks.end());
  std::sort(r.ks.begin(), r.ks.end());
  r.ks.erase(std::unique(r.ks.begin(), r.ks.end()), r.ks.end());
  if (r.ks.empty()) throw Error(ErrorCode::InvalidArgument, "no k values given");
  if (r.ks.front() == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (r.ks.back() > n)
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(r.ks.back()) + " exceeds pool of " +
                                          std::to_string(n));
  r.n_queries = n;
  r.pool_size = n;
  std::vector<double> tgt_norm(n);
  for (std::size_t j = 0; j < n; ++j) tgt_norm[j] = norm(tgt.row(j));
  r.ranks.resize(n);
  parallel_for(n, [&](std::size_t q) {
    const auto query = src.row(q);
    const double qn = norm(query);
    auto sim = [&](std::size_t j) {
      const double den = qn * tgt_norm[j];
      return den > 0.0 ? dot(query, tgt.row(j)) / den : 0.0;
    };
    const double own = sim(q);
    std::size_t rank = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q) continue;
      const double s = sim(j);
      if (s > own || (s == own && j < q)) ++rank;
    }
    r.ranks[q] = rank;
  });
  for (std::size_t k : r.ks) r.accuracy.push_back(r.accuracy_at(k));
  return r;
}

PerClusterTop1 per_cluster_top1(const RetrievalReport& report, const Clustering& target_clustering,
                                std::size_t min_queries) {
  if (target_clustering.labels.size() != report.n_queries)
    throw Error(ErrorCode::InvalidArgument, "clustering does not cover the target set");
  PerClusterTop1 out;
  out.min_queries = min_queries;
  out.rows.resize(target_clustering.n_clusters);
  for (std::size_t c = 0; c < out.rows.size(); ++c) out.rows[c].cluster = static_cast<int>(c);
  for (std::size_t q = 0; q < report.n_queries; ++q) {
    const int label = target_clustering.labels[q];
    const bool hit = report.hit(q, 1);
    if (label < 0) {
      ++out.noise_queries;
      out.noise_hits += hit ? 1 : 0;
      continue;
    }
    auto& row = out.rows[static_cast<std::size_t>(label)];
    ++row.n;
    row.hits += hit ? 1 : 0;
  }
  for (auto& row : out.rows) {
    row.top1 = row.n ? static_cast<double>(row.hits) / static_cast<double>(row.n) : 0.0;
    row.flagged = row.n < min_queries;
  }
  return out;
}

PerClusterTop1 per_cluster_top1(const PairedDataset& ds, Direction direction,
                                const Clustering& target_clustering, std::size_t min_queries) {
  const std::size_t one = 1;
  return per_cluster_top1(cross_modal_retrieve(ds, direction, std::span(&one, 1)), target_clustering,
                          min_queries);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "pearson needs two equally sized samples of size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw Error(ErrorCode::InvalidArgument, "pearson is undefined for a constant sample");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ClusterAccuracyCorrelation auc_accuracy_correlation(const PerClusterTop1& top1,
                                                    std::span<const SpectrumReport> spectra,
                                                    bool use_log_auc) {
  ClusterAccuracyCorrelation out;
  out.log_auc = use_log_auc;
  for (const auto& row : top1.rows) {
    const std::string id = std::to_string(row.cluster);
    const auto it = std::find_if(spectra.begin(), spectra.end(),
                                 [&](const SpectrumReport& s) { return s.source == id; });
    if (row.flagged || it == spectra.end() || it->degenerate) {
      out.excluded.push_back(row.cluster);
      continue;
    }
    out.rows.push_back({row.cluster, row.n, use_log_auc ? it->auc_log : it->auc, row.top1});
  }
  out.n_clusters_used = out.rows.size();
  if (out.rows.size() < 3)
    throw Error(ErrorCode::TooFewClusters, "need at least 3 clusters after exclusions, have " +
                                               std::to_string(out.rows.size()));
  std::vector<double> x, y;
  for (const auto& r : out.rows) {
    x.push_back(r.auc);
    y.push_back(r.top1);
  }
  out.pearson_r = pearson(x, y);
  return out;
}

std::string retrieval_reports_json(std::span<const RetrievalReport> reports) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json e;
    e["direction"] = std::string(to_string(r.direction));
    e["n_queries"] = r.n_queries;
    e["pool_size"] = r.pool_size;
    nlohmann::ordered_json acc = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.ks.size(); ++i) acc[std::to_string(r.ks[i])] = r.accuracy[i];
    e["accuracy_at"] = acc;
    j.push_back(e);
  }
  return j.dump(2);
}

std::string correlation_json(const ClusterAccuracyCorrelation& c) {
  nlohmann::ordered_json j;
  j["pearson_r"] = c.pearson_r;
  j["n_clusters_used"] = c.n_clusters_used;
  j["auc"] = c.log_auc ? "log10" : "raw";
  j["excluded"] = c.excluded;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : c.rows)
    j["rows"].push_back({{"cluster", r.cluster}, {"n", r.n}, {"auc", r.auc}, {"top1", r.top1}});
  return j.dump(2);
}

void write_correlation_csv(std::ostream& out, const ClusterAccuracyCorrelation& c) {
  out << "cluster,n,auc,top1\n";
  for (const auto& r : c.rows)
    out << r.cluster << ',' << r.n << ',' << format_double(r.auc) << ',' << format_double(r.top1) << '\n';
}

std::vector<CorrelationRow> read_correlation_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  t.require_columns({"cluster", "n", "auc", "top1"});
  std::vector<CorrelationRow> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    rows.push_back({static_cast<int>(parse_int(t.at(r, "cluster"))), static_cast<std::size_t>(parse_int(t.at(r, "n"))),
                    parse_double(t.at(r, "auc")), parse_double(t.at(r, "top1"))});
  return rows;
}

}  // namespace topemb
