// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.
#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "topemb/clustering.hpp"
#include "topemb/csv.hpp"
#include "topemb/gaplab.hpp"
#include "topemb/manifold.hpp"
#include "topemb/pipeline.hpp"
#include "topemb/report.hpp"
#include "topemb/retrieval.hpp"
#include "topemb/separability.hpp"
#include "topemb/spectra.hpp"
#include "topemb/synthetic.hpp"

using namespace topemb;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kGradRelTol = 1e-5;
constexpr std::size_t kGradInstances = 20;
constexpr double kClosedFormTol = 1e-10;
constexpr double kReconstructionTol = 1e-9;
constexpr double kRank2RatioMax = 1e-10;
constexpr double kRotationTol = 1e-8;
constexpr double kBlobAgreementMin = 0.95;
constexpr double kMstTol = 1e-12;
constexpr double kSigmaTol = 1e-6;
constexpr double kSigmaPaper = 1.134;
constexpr double kSigmaPaperTol = 1e-3;
constexpr double kFitAbTol = 1e-2;
constexpr double kPaperA = 1.577, kPaperB = 0.8951;
constexpr double kHaversineTol = 1e-12;
constexpr double kBinomialSigmas = 3.0;
constexpr double kCorrelationMin = 0.5;
constexpr std::size_t kPhenomenaSeeds = 5;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("topemb_accept_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------

Outcome gradients() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u_tau(0.5, 8.0);
  double worst[4] = {0, 0, 0, 0};
  for (std::size_t t = 0; t < kGradInstances; ++t) {
    const std::size_t b = 2 + t % 6, d = 3 + t % 4;
    const Matrix x = oracle::random_unit_rows(b, d, rng), y = oracle::random_unit_rows(b, d, rng);
    const double tau = u_tau(rng);
    const LossKind kinds[2] = {LossKind::InfoNCE, LossKind::InfoLOOB};
    for (int k = 0; k < 2; ++k) {
      const LossResult l = contrastive_loss(x, y, tau, kinds[k]);
      auto fx = [&](const std::vector<double>& v) { return contrastive_loss(Matrix(b, d, v), y, tau, kinds[k]).value; };
      auto fy = [&](const std::vector<double>& v) { return contrastive_loss(x, Matrix(b, d, v), tau, kinds[k]).value; };
      worst[k] = std::max({worst[k], oracle::relative_error(l.grad_x.data(), oracle::numeric_gradient(fx, x.data())),
                           oracle::relative_error(l.grad_y.data(), oracle::numeric_gradient(fy, y.data()))});
    }

    // Hopfield: scalar objective <w, retrieve(q, M)>
    const Matrix mem = oracle::random_unit_rows(b, d, rng);
    const Matrix q = oracle::random_unit_rows(1, d, rng);
    const Matrix w = oracle::random_matrix(1, d, rng);
    const double beta = u_tau(rng);
    const HopfieldGrad g = hopfield_backward(q.row(0), mem, beta, w.row(0));
    auto fq = [&](const std::vector<double>& v) { return dot(w.row(0), hopfield_retrieve(v, mem, beta)); };
    auto fm = [&](const std::vector<double>& v) { return dot(w.row(0), hopfield_retrieve(q.row(0), Matrix(b, d, v), beta)); };
    worst[2] = std::max({worst[2], oracle::relative_error(g.query, oracle::numeric_gradient(fq, q.data())),
                         oracle::relative_error(g.memory.data(), oracle::numeric_gradient(fm, mem.data()))});

    // End to end through both encoders, cycling loss and Hopfield.
    LabConfig c;
    c.input_dim = 5;
    c.embed_dim = 4;
    c.loss = kinds[t % 2];
    c.use_hopfield = (t / 2) % 2 == 1;
    c.temperature = tau;
    c.hopfield_beta = beta;
    const Encoder ea = Encoder::random(c.input_dim, 6, c.embed_dim, 1.0, rng);
    const Encoder eb = Encoder::random(c.input_dim, 6, c.embed_dim, 1.0, rng);
    const Matrix ia = oracle::random_matrix(b, c.input_dim, rng), ib = oracle::random_matrix(b, c.input_dim, rng);
    const BatchLoss bl = lab_batch_loss(ea, eb, ia, ib, c);
    auto fa = [&](const std::vector<double>& p) {
      Encoder e = ea;
      e.params() = p;
      return lab_batch_loss(e, eb, ia, ib, c).value;
    };
    auto fb = [&](const std::vector<double>& p) {
      Encoder e = eb;
      e.params() = p;
      return lab_batch_loss(ea, e, ia, ib, c).value;
    };
    worst[3] = std::max({worst[3], oracle::relative_error(bl.grad_a, oracle::numeric_gradient(fa, ea.params())),
                         oracle::relative_error(bl.grad_b, oracle::numeric_gradient(fb, eb.params()))});
  }
  const char* names[4] = {"infonce", "infoloob", "hopfield", "encoder"};
  for (int k = 0; k < 4; ++k) {
    o.detail << names[k] << " max rel err " << worst[k] << "; ";
    o.check(worst[k] <= kGradRelTol, names[k]);
  }
  return o;
}

Outcome loss_fixtures() {
  Outcome o;
  std::mt19937_64 rng(102);
  const Matrix x1 = oracle::random_unit_rows(1, 4, rng), y1 = oracle::random_unit_rows(1, 4, rng);
  const double single = infonce_loss(x1, y1, 2.0).value;
  o.detail << "B=1 infonce " << single << "; ";
  o.check(single == 0.0, "B=1 infonce is exactly 0");

  const Matrix e = Matrix::identity(2);
  const double got = infonce_loss(e, e, 1.0).value;
  const double want = oracle::naive_contrastive(e, e, 1.0, false);
  const double closed = 2.0 * std::log1p(std::exp(-1.0));
  o.detail << "B=2 infonce " << got << " closed form " << closed << "; ";
  o.check(std::abs(got - closed) <= kClosedFormTol && std::abs(want - closed) <= kClosedFormTol, "B=2 closed form");

  bool raised = false;
  try {
    (void)infoloob_loss(x1, y1, 2.0);
  } catch (const Error& err) {
    raised = err.code() == ErrorCode::BatchTooSmall;
  }
  o.detail << "B=1 infoloob raises BatchTooSmall: " << (raised ? "yes" : "no");
  o.check(raised, "BatchTooSmall");
  return o;
}

Outcome eigensolver() {
  Outcome o;
  std::mt19937_64 rng(103);
  double worst_rec = 0.0;
  for (std::size_t d : {2u, 7u, 32u, 100u, 256u}) {
    const Matrix r = oracle::random_matrix(d, d, rng);
    Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) a(i, j) = 0.5 * (r(i, j) + r(j, i));
    const SymmetricEigen e = jacobi_eigen(a);
    double err = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
        err = std::max(err, std::abs(s - a(i, j)));
        scale = std::max(scale, std::abs(a(i, j)));
      }
    worst_rec = std::max(worst_rec, err / scale);
  }
  o.detail << "max reconstruction err " << worst_rec << " (D<=256); ";
  o.check(worst_rec <= kReconstructionTol, "reconstruction");

  const Matrix planted = matmul(oracle::random_matrix(300, 2, rng), oracle::random_matrix(2, 24, rng));
  const SpectrumReport s = spectrum_of_points(planted);
  const double ratio = s.sigma[2] / s.sigma[0];
  o.detail << "rank-2 sigma[2]/sigma[0] " << ratio << "; ";
  o.check(ratio < kRank2RatioMax, "rank-2 cliff");

  const Matrix pts = oracle::random_matrix(200, 16, rng);
  const Matrix q = oracle::random_rotation(16, rng);
  const SpectrumReport s1 = spectrum_of_points(pts), s2 = spectrum_of_points(matmul(pts, q));
  double drift = 0.0;
  for (std::size_t k = 0; k < s1.sigma.size(); ++k) drift = std::max(drift, std::abs(s1.sigma[k] - s2.sigma[k]));
  drift /= std::max(1.0, s1.sigma[0]);
  o.detail << "rotation drift " << drift;
  o.check(drift <= kRotationTol, "rotation invariance");
  return o;
}

Outcome hdbscan() {
  Outcome o;
  std::mt19937_64 rng(104);
  std::normal_distribution<double> normal;
  Matrix x(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    x(i, 0) = normal(rng) + (i < 100 ? 0.0 : 10.0);
    x(i, 1) = normal(rng);
  }
  ClusteringParams p;
  p.metric = Metric::Euclidean;
  p.min_cluster_size = 10;
  const Clustering c = cluster(x, p);
  std::size_t agree = 0, swapped = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const int truth = i < 100 ? 0 : 1;
    agree += c.labels[i] == truth;
    swapped += c.labels[i] == 1 - truth;
  }
  const double agreement = static_cast<double>(std::max(agree, swapped)) / 200.0;
  o.detail << "blobs: " << c.n_clusters << " clusters, agreement " << agreement << "; ";
  o.check(c.n_clusters == 2 && agreement >= kBlobAgreementMin, "two blobs");

  std::size_t fixtures = 0, matched = 0;
  for (std::size_t n = 3; n <= 12; ++n) {
    for (std::size_t mcs = 2; mcs <= 4; ++mcs) {
      for (std::size_t ms = 1; ms <= 2; ++ms) {
        for (bool single : {false, true}) {
          const Matrix pts = oracle::random_matrix(n, 2, rng);
          ClusteringParams q;
          q.metric = Metric::Euclidean;
          q.min_cluster_size = mcs;
          q.min_samples = std::min(ms, n - 1);
          q.allow_single_cluster = single;
          const Clustering cc = cluster(pts, q);
          const auto best = oracle::exhaustive_antichain(cc.tree);
          ++fixtures;
          matched += std::find(best.optimal.begin(), best.optimal.end(), cc.tree.selected) != best.optimal.end();
        }
      }
    }
  }
  o.detail << "antichain oracle " << matched << "/" << fixtures << "; ";
  o.check(matched == fixtures, "antichain selection");

  double worst = 0.0;
  for (std::size_t n : {5u, 20u, 60u, 150u}) {
    const Matrix pts = oracle::random_unit_rows(n, 5, rng);
    for (Metric m : {Metric::Euclidean, Metric::Cosine}) {
      const auto core = core_distances(pts, 3, m);
      const auto mst = mutual_reachability_mst(pts, core, m);
      double w = 0.0;
      for (const auto& e : mst) w += e.weight;
      worst = std::max(worst, std::abs(w - oracle::kruskal_mst_weight(pts, core, m)));
    }
  }
  o.detail << "MST vs Kruskal max diff " << worst;
  o.check(worst <= kMstTol, "MST weight");
  return o;
}

double min_inter_over_mean_intra(const Matrix& pts, std::size_t per_blob) {
  double min_inter = std::numeric_limits<double>::infinity(), intra = 0.0;
  std::size_t n_intra = 0;
  for (std::size_t i = 0; i < pts.rows(); ++i)
    for (std::size_t j = i + 1; j < pts.rows(); ++j) {
      const double d = euclidean_distance(pts.row(i), pts.row(j));
      if ((i < per_blob) == (j < per_blob)) {
        intra += d;
        ++n_intra;
      } else {
        min_inter = std::min(min_inter, d);
      }
    }
  return min_inter / (intra / static_cast<double>(n_intra));
}

Outcome umap_internals() {
  Outcome o;
  const std::vector<double> d = {1.0, 2.0, 3.0};
  const double sigma = smooth_knn(d).sigma, ref = oracle::smooth_knn_sigma(d);
  o.detail << "sigma(1,2,3) " << sigma << " oracle " << ref << "; ";
  o.check(std::abs(sigma - ref) <= kSigmaTol && std::abs(sigma - kSigmaPaper) <= kSigmaPaperTol, "smooth_knn");

  const CurveParams ab = fit_ab(0.1);
  const auto [ga, gb] = oracle::fit_ab_grid(0.1);
  o.detail << "fit_ab(0.1) (" << ab.a << ", " << ab.b << ") grid (" << ga << ", " << gb << "); ";
  o.check(std::abs(ab.a - ga) <= kFitAbTol && std::abs(ab.b - gb) <= kFitAbTol &&
              std::abs(ab.a - kPaperA) <= kFitAbTol && std::abs(ab.b - kPaperB) <= kFitAbTol,
          "fit_ab");

  std::mt19937_64 rng(105);
  std::normal_distribution<double> normal;
  Matrix x(120, 8);
  for (std::size_t i = 0; i < 120; ++i) {
    for (std::size_t c = 0; c < 8; ++c) x(i, c) = normal(rng);
    if (i >= 60) x(i, 0) += 12.0;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    LayoutParams p;
    p.metric = Metric::Euclidean;
    p.seed = seed;
    worst = std::min(worst, min_inter_over_mean_intra(umap(x, p).coords, 60));
  }
  o.detail << "worst min-inter/mean-intra " << worst << "; ";
  o.check(worst > 1.0, "two-blob layout");

  std::uniform_real_distribution<double> ulat(-std::numbers::pi / 2, std::numbers::pi / 2);
  std::uniform_real_distribution<double> ulon(-std::numbers::pi, std::numbers::pi);
  double hav = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const LatLon p{ulat(rng), ulon(rng)};
    hav = std::max(hav, std::abs(haversine(p, antipode(p)) - std::numbers::pi));
  }
  o.detail << "antipode max err " << hav;
  o.check(hav <= kHaversineTol, "haversine antipode");
  return o;
}

Outcome retrieval() {
  Outcome o;
  std::mt19937_64 rng(106);
  const Matrix same = oracle::random_unit_rows(200, 16, rng);
  const std::vector<std::size_t> k1 = {1};
  const double acc_same =
      cross_modal_retrieve(make_paired(make_set(same, "image"), make_set(same, "text"), "same"), Direction::AtoB, k1)
          .accuracy[0];
  o.detail << "identical pairs acc@1 " << acc_same << "; ";
  o.check(acc_same == 1.0, "identical pairs");

  const PairedDataset rnd = make_paired(make_set(oracle::random_unit_rows(1000, 64, rng), "image"),
                                        make_set(oracle::random_unit_rows(1000, 64, rng), "text"), "random");
  const std::vector<std::size_t> ks = {1, 5, 10, 50, 100};
  const RetrievalReport r = cross_modal_retrieve(rnd, Direction::AtoB, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double p = static_cast<double>(ks[i]) / 1000.0;
    const double sd = std::sqrt(p * (1.0 - p) / 1000.0);
    o.check(std::abs(r.accuracy[i] - p) <= kBinomialSigmas * sd, "binomial k=" + std::to_string(ks[i]));
  }
  o.detail << "random acc@1,5,10,50,100 = " << r.accuracy[0] << "," << r.accuracy[1] << "," << r.accuracy[2] << ","
           << r.accuracy[3] << "," << r.accuracy[4] << "; ";

  std::vector<int> labels(1000);
  std::uniform_int_distribution<int> ul(-1, 6);
  for (int& l : labels) l = ul(rng);
  const PerClusterTop1 pc = per_cluster_top1(r, clustering_from_labels(labels));
  std::size_t hits = pc.noise_hits, queries = pc.noise_queries;
  for (const auto& row : pc.rows) {
    hits += row.hits;
    queries += row.n;
  }
  std::size_t global_hits = 0;
  for (std::size_t q : r.ranks) global_hits += q < 1;
  o.detail << "partition hits " << hits << " vs global " << global_hits << "; ";
  o.check(hits == global_hits && queries == 1000, "partition consistency");

  std::size_t agree = 0, total = 0;
  for (std::size_t n = 2; n <= 10; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      Matrix a = oracle::random_unit_rows(n, 3, rng), b = a;
      std::normal_distribution<double> noise(0.0, 0.7);
      for (double& v : b.data()) v += noise(rng);
      normalize_rows(b);
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 1);
      const PairedDataset ds = make_paired(make_set(a, "image"), make_set(b, "text"), "small");
      for (Direction dir : {Direction::AtoB, Direction::BtoA}) {
        const RetrievalReport rr = cross_modal_retrieve(ds, dir, all);
        const auto ranks = dir == Direction::AtoB ? oracle::sorted_ranks(ds.a.vectors, ds.b.vectors)
                                                  : oracle::sorted_ranks(ds.b.vectors, ds.a.vectors);
        bool ok = rr.ranks == ranks;
        for (std::size_t k = 0; k < n; ++k) {
          std::size_t h = 0;
          for (std::size_t q : ranks) h += q < all[k];
          ok = ok && rr.accuracy[k] == static_cast<double>(h) / static_cast<double>(n);
        }
        agree += ok;
        ++total;
      }
    }
  }
  o.detail << "exhaustive-sort oracle " << agree << "/" << total;
  o.check(agree == total, "exhaustive sort");
  return o;
}

Outcome phenomena() {
  Outcome o;
  // [hopfield][loss] per-seed values
  std::map<std::pair<bool, LossKind>, std::vector<double>> svm, gap, cosine;
  for (std::size_t seed = 0; seed < kPhenomenaSeeds; ++seed) {
    LabConfig c;
    c.seed = seed;
    const LabAblation ab = ablation_2x2(c);
    for (const auto& row : ab.table) {
      svm[{row.hopfield, row.loss}].push_back(row.svm_accuracy);
      gap[{row.hopfield, row.loss}].push_back(row.centroid_gap);
      cosine[{row.hopfield, row.loss}].push_back(row.mean_paired_cosine);
    }
  }
  for (bool hop : {false, true}) {
    const auto nce = std::pair{hop, LossKind::InfoNCE}, loob = std::pair{hop, LossKind::InfoLOOB};
    const double s_n = median(svm[nce]), s_l = median(svm[loob]);
    const double g_n = median(gap[nce]), g_l = median(gap[loob]);
    const double c_n = median(cosine[nce]), c_l = median(cosine[loob]);
    const std::string tag = hop ? "hopfield" : "plain";
    o.detail << "(7a " << tag << ") svm " << s_n << " > " << s_l << ", gap " << g_n << " > " << g_l << "; ";
    o.detail << "(7b " << tag << ") cosine " << c_l << " > " << c_n << "; ";
    o.check(s_n > s_l && g_n > g_l, "7a " + tag);
    o.check(c_l > c_n, "7b " + tag);
  }

  std::vector<double> rs;
  for (std::size_t seed = 0; seed < kPhenomenaSeeds; ++seed) {
    PlantedParams p;
    p.seed = seed;
    const PlantedClusters pc = planted_clusters(p);
    const Clustering truth = clustering_from_labels(pc.labels);
    const auto spectra = per_cluster_spectra(pc.data.a, truth);
    const PerClusterTop1 top1 = per_cluster_top1(pc.data, Direction::AtoB, truth);
    rs.push_back(auc_accuracy_correlation(top1, spectra).pearson_r);
  }
  const double r = median(rs);
  o.detail << "(7c) median r " << r;
  o.check(r > kCorrelationMin, "7c");
  return o;
}

fs::path planted_manifest(const fs::path& dir) {
  PlantedParams p;
  p.intrinsic_dims = {2, 6, 12};
  p.points_per_cluster = 70;
  p.dim = 16;
  p.seed = 7;
  return save_dataset(planted_clusters(p).data, dir / "data");
}

PipelineConfig pipeline_config(const fs::path& manifest, const fs::path& out) {
  PipelineConfig c;
  c.manifest = manifest;
  c.output_dir = out;
  c.seed = 11;
  c.clustering.min_cluster_size = 20;
  c.layout.n_epochs = 100;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_text_file(e.path());
  return files;
}

Outcome determinism() {
  Outcome o;
  ScratchDir tmp("det");
  const PipelineConfig c = pipeline_config(planted_manifest(tmp.path()), tmp.path() / "out");
  run_pipeline(c);
  const auto first = snapshot(c.output_dir);
  run_pipeline(c);
  const auto second = snapshot(c.output_dir);
  std::size_t same = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    const bool eq = it != second.end() && it->second == bytes;
    same += eq;
    o.check(eq, name);
  }
  o.check(first.size() == second.size(), "file sets differ");
  o.detail << same << "/" << first.size() << " artifacts byte-identical";
  return o;
}

template <typename Fn>
bool reparses(const fs::path& file, Fn&& fn) {
  try {
    std::ifstream in(file, std::ios::binary);
    fn(in);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Outcome round_trip() {
  Outcome o;
  ScratchDir tmp("fmt");
  std::mt19937_64 rng(109);
  Matrix a = oracle::random_unit_rows(257, 33, rng), b = oracle::random_unit_rows(257, 33, rng);
  round_to_storage(a);
  round_to_storage(b);
  const PairedDataset ds = make_paired(make_set(a, "image"), make_set(b, "text"), "bits");
  const PairedDataset back = load_dataset(save_dataset(ds, tmp.path() / "tope", false));
  const bool exact = back.a.vectors.data().size() == a.data().size() &&
                     std::memcmp(back.a.vectors.data().data(), a.data().data(), a.data().size() * sizeof(double)) == 0 &&
                     std::memcmp(back.b.vectors.data().data(), b.data().data(), b.data().size() * sizeof(double)) == 0;
  o.detail << "TOPE bit-exact: " << (exact ? "yes" : "no") << "; ";
  o.check(exact, "TOPE round trip");

  // every pipeline artifact through the matching reader
  const PipelineConfig c = pipeline_config(planted_manifest(tmp.path()), tmp.path() / "out");
  const PipelineResult res = run_pipeline(c);
  const std::map<std::string, std::function<void(std::istream&)>> readers = {
      {"fig3.csv", [](std::istream& in) { (void)read_histogram_csv(in); }},
      {"clusters.csv", [](std::istream& in) { (void)read_clustering_csv(in); }},
      {"spectra.csv", [](std::istream& in) { (void)read_spectra_csv(in); }},
      {"layout.csv", [](std::istream& in) { (void)read_layout_csv(in); }},
      {"fig15.csv", [](std::istream& in) { (void)read_correlation_csv(in); }},
      {"table1.json",
       [](std::istream& in) {
         std::stringstream s;
         s << in.rdbuf();
         (void)parse_classifier_report_json(s.str());
       }},
      {"run.json",
       [](std::istream& in) {
         const auto j = nlohmann::json::parse(in);
         (void)parse_pipeline_config(j.at("config").dump());
       }},
  };
  std::size_t ok = 0, checked = 0;
  for (const auto& art : res.artifacts) {
    const std::string name = art.string();
    const fs::path file = c.output_dir / art;
    bool good = false;
    if (const auto it = readers.find(name); it != readers.end()) {
      good = reparses(file, it->second);
    } else if (art.extension() == ".json") {
      good = reparses(file, [](std::istream& in) {
        if (!nlohmann::json::accept(in)) throw std::runtime_error("bad json");
      });
    } else if (art.extension() == ".csv") {
      good = reparses(file, [](std::istream& in) { (void)read_csv(in); });
    } else {
      continue;  // SVG
    }
    ++checked;
    ok += good;
    o.check(good, name);
  }

  // lab output: run.json config and the held-out embeddings
  LabConfig lc;
  lc.steps = 20;
  lc.samples = 300;
  const LabRun run = train(lc);
  save_lab_run(run, tmp.path() / "lab");
  const auto lab_json = nlohmann::json::parse(read_text_file(tmp.path() / "lab" / "run.json"));
  const LabConfig lc_back = parse_lab_config_json(lab_json.at("config").dump());
  const PairedDataset held = load_dataset(tmp.path() / "lab" / "manifest.json");
  const bool lab_ok = lc_back.steps == lc.steps && held.a.vectors == run.heldout.a.vectors &&
                      held.b.vectors == run.heldout.b.vectors;
  o.check(lab_ok, "lab run");
  o.detail << ok << "/" << checked << " pipeline CSV/JSON re-parse; lab run " << (lab_ok ? "ok" : "bad");
  o.check(checked >= 8, "too few artifacts checked");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::pair<std::string, std::function<Outcome()>>>> criteria = {
      {1, {"gradient correctness", gradients}},
      {2, {"loss fixtures", loss_fixtures}},
      {3, {"eigensolver", eigensolver}},
      {4, {"hdbscan", hdbscan}},
      {5, {"umap internals", umap_internals}},
      {6, {"retrieval", retrieval}},
      {7, {"directional phenomena", phenomena}},
      {8, {"determinism", determinism}},
      {9, {"format round-trip", round_trip}},
  };
  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    const auto& [name, fn] = entry;
    bool pass = false;
    std::string detail;
    try {
      Outcome o = fn();
      pass = o.pass;
      detail = o.detail.str();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
