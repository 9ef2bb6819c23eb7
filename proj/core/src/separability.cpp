#include "topemb/separability.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <random>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"
#include "topemb/parallel.hpp"
#include "topemb/spectra.hpp"

namespace topemb {

LinearModel fit_linear_svm(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (y.size() != n) throw Error(ErrorCode::InvalidArgument, "label count does not match rows");
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "training data has a single class");

  // w[d] is the bias weight on a constant 1 feature.
  std::vector<double> w(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  const double radius = 1.0 / std::sqrt(params.lambda);
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (params.lambda * static_cast<double>(t));
      auto xi = x.row(i);
      const double yi = static_cast<double>(y[i]);
      const double margin = yi * (dot(std::span<const double>(w).first(d), xi) + w[d]);
      const double shrink = 1.0 - eta * params.lambda;
      for (double& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * yi * xi[j];
        w[d] += eta * yi;
      }
      const double wn = norm(w);
      if (wn > radius) {
        const double s = radius / wn;
        for (double& v : w) v *= s;
      }
    }
  }
  LinearModel model;
  model.b = w[d];
  w.pop_back();
  model.w = std::move(w);
  return model;
}

ClassifierReport score_classifier(const LinearModel& model, const Matrix& x, std::span<const int> y) {
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int p = model.predict(x.row(i));
    if (p == y[i]) ++correct;
    if (p == 1 && y[i] == 1) ++tp;
    if (p == 1 && y[i] != 1) ++fp;
    if (p != 1 && y[i] == 1) ++fn;
  }
  ClassifierReport r;
  r.n_eval = x.rows();
  r.accuracy = x.rows() ? static_cast<double>(correct) / static_cast<double>(x.rows()) : 0.0;
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return r;
}

ClassifierReport split_and_score(const Matrix& x, std::span<const int> y, double train_fraction,
                                 const SvmParams& params) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "train fraction must be in (0, 1)");
  const std::size_t n = x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed ^ 0x5eedULL);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw Error(ErrorCode::TooFewPoints, "split leaves an empty train or eval part");
  const std::span<const std::size_t> train_idx(order.data(), n_train);
  const std::span<const std::size_t> eval_idx(order.data() + n_train, n - n_train);
  std::vector<int> y_train, y_eval;
  for (auto i : train_idx) y_train.push_back(y[i]);
  for (auto i : eval_idx) y_eval.push_back(y[i]);
  const auto model = fit_linear_svm(select_rows(x, train_idx), y_train, params);
  ClassifierReport r = score_classifier(model, select_rows(x, eval_idx), y_eval);
  r.n_train = n_train;
  r.train_fraction = train_fraction;
  r.params = params;
  return r;
}

ClassifierReport modality_separability(const PairedDataset& ds, double train_fraction,
                                       const SvmParams& params) {
  if (ds.count() < 10) throw Error(ErrorCode::TooFewPoints, "separability needs N >= 10 pairs");
  const Matrix x = vstack(ds.a.vectors, ds.b.vectors);
  std::vector<int> y(2 * ds.count(), -1);
  std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(ds.count()), 1);
  ClassifierReport r = split_and_score(x, y, train_fraction, params);
  r.positive_class = ds.a.modality;
  r.negative_class = ds.b.modality;
  return r;
}

PcaResult pca_project(const Matrix& points, std::size_t k) {
  const std::size_t d = points.cols();
  if (points.rows() < 2) throw Error(ErrorCode::TooFewPoints, "PCA needs at least 2 points");
  if (k < 1 || k > d) throw Error(ErrorCode::InvalidArgument, "PCA needs 1 <= k <= D");
  const auto eig = jacobi_eigen(covariance(points));
  PcaResult r;
  r.mean = column_means(points);
  r.sigma.resize(d);
  for (std::size_t i = 0; i < d; ++i) r.sigma[i] = std::max(0.0, eig.values[i]);
  r.basis = Matrix(d, k);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < k; ++j) r.basis(i, j) = eig.vectors(i, j);
  r.projection = Matrix(points.rows(), k);
  for (std::size_t p = 0; p < points.rows(); ++p) {
    auto row = points.row(p);
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += (row[i] - r.mean[i]) * r.basis(i, j);
      r.projection(p, j) = s;
    }
  }
  const double total = std::accumulate(r.sigma.begin(), r.sigma.end(), 0.0);
  const double top = std::accumulate(r.sigma.begin(), r.sigma.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  r.explained_variance = total > 0.0 ? top / total : 0.0;
  return r;
}

PcaResult pca_project(const EmbeddingSet& set, std::size_t k) { return pca_project(set.vectors, k); }

Histogram Histogram::build(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "bad histogram range");
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    const double pos = std::floor((v - lo) / width);
    const auto idx = static_cast<std::ptrdiff_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
}

Histogram read_histogram_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  t.require_columns({"bin_left", "bin_right", "count"});
  Histogram h;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (r == 0) h.edges.push_back(parse_double(t.at(r, "bin_left")));
    h.edges.push_back(parse_double(t.at(r, "bin_right")));
    h.counts.push_back(static_cast<std::size_t>(parse_int(t.at(r, "count"))));
  }
  return h;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

GapReport paired_cosine_distribution(const PairedDataset& ds, std::size_t bins) {
  const std::size_t n = ds.count();
  if (n < 1) throw Error(ErrorCode::TooFewPoints, "no pairs");
  GapReport g;
  g.cosines.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.cosines[i] = cosine_similarity(ds.a.vectors.row(i), ds.b.vectors.row(i));
  g.mean_cosine = std::accumulate(g.cosines.begin(), g.cosines.end(), 0.0) / static_cast<double>(n);
  g.histogram = Histogram::build(g.cosines, -1.0, 1.0, bins);
  const auto ma = column_means(ds.a.vectors);
  const auto mb = column_means(ds.b.vectors);
  g.centroid_gap = euclidean_distance(ma, mb);
  return g;
}

NearestReference nearest_reference_similarity(const EmbeddingSet& query, const EmbeddingSet& reference,
                                              std::size_t bins) {
  if (reference.count() == 0) throw Error(ErrorCode::TooFewPoints, "empty reference set");
  if (query.dim() != reference.dim()) throw Error(ErrorCode::HeaderMismatch, "dimension mismatch");
  NearestReference out;
  out.similarities.resize(query.count());
  parallel_for(query.count(), [&](std::size_t q) {
    double best = -1.0;
    for (std::size_t r = 0; r < reference.count(); ++r)
      best = std::max(best, cosine_similarity(query.vectors.row(q), reference.vectors.row(r)));
    out.similarities[q] = best;
  });
  out.histogram = Histogram::build(out.similarities, -1.0, 1.0, bins);
  return out;
}

std::string classifier_report_json(const ClassifierReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["positive_class"] = r.positive_class;
  j["negative_class"] = r.negative_class;
  j["n_train"] = r.n_train;
  j["n_eval"] = r.n_eval;
  j["split"] = "seeded shuffle, train fraction " + format_double(r.train_fraction);
  j["train_fraction"] = r.train_fraction;
  j["lambda"] = r.params.lambda;
  j["epochs"] = r.params.epochs;
  j["seed"] = r.params.seed;
  return j.dump(2);
}

ClassifierReport parse_classifier_report_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ClassifierReport r;
  r.accuracy = j.at("accuracy").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.positive_class = j.at("positive_class").get<std::string>();
  r.negative_class = j.at("negative_class").get<std::string>();
  r.n_train = j.at("n_train").get<std::size_t>();
  r.n_eval = j.at("n_eval").get<std::size_t>();
  r.train_fraction = j.at("train_fraction").get<double>();
  r.params.lambda = j.at("lambda").get<double>();
  r.params.epochs = j.at("epochs").get<std::size_t>();
  r.params.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

std::string gap_report_json(const GapReport& g) {
  nlohmann::ordered_json j;
  j["n_pairs"] = g.cosines.size();
  j["mean_paired_cosine"] = g.mean_cosine;
  j["centroid_gap"] = g.centroid_gap;
  j["bin_edges"] = g.histogram.edges;
  j["counts"] = g.histogram.counts;
  return j.dump(2);
}

}  // namespace topemb
