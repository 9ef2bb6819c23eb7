#include <gtest/gtest.h>

#include <array>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "topemb/manifold.hpp"

using namespace topemb;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix two_blobs(std::size_t per_blob, std::size_t d, double separation, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(2 * per_blob, d);
  for (std::size_t i = 0; i < 2 * per_blob; ++i) {
    for (std::size_t c = 0; c < d; ++c) x(i, c) = normal(rng);
    if (i >= per_blob) x(i, 0) += separation;
  }
  return x;
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

}  // namespace

TEST(Knn, MatchesFullSort) {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::random_unit_rows(40, 5, rng);
  const KnnGraph g = knn_graph(x, 6, Metric::Cosine);
  for (std::size_t i = 0; i < 40; ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < 40; ++j)
      if (j != i) all.emplace_back(oracle::metric_distance(x.row(i), x.row(j), Metric::Cosine), j);
    std::sort(all.begin(), all.end());
    for (std::size_t m = 0; m < 6; ++m) {
      EXPECT_EQ(g.neighbors(i)[m], all[m].second);
      EXPECT_EQ(g.neighbor_distances(i)[m], all[m].first);
    }
  }
  EXPECT_TOPEMB_ERROR(knn_graph(x, 40, Metric::Cosine), ErrorCode::KTooLarge);
}

TEST(SmoothKnn, ClosedFormForOneTwoThree) {
  const std::vector<double> d = {1.0, 2.0, 3.0};
  const SmoothKnn s = smooth_knn(d);
  // 1 + u + u^2 = log2(3) with u = exp(-1/sigma)
  const double c = std::log2(3.0) - 1.0;
  const double u = (-1.0 + std::sqrt(1.0 + 4.0 * c)) / 2.0;
  const double sigma = -1.0 / std::log(u);
  EXPECT_NEAR(s.sigma, sigma, 1e-6);
  EXPECT_NEAR(s.sigma, 1.1332, 1e-3);
  EXPECT_DOUBLE_EQ(s.rho, 1.0);
  EXPECT_TRUE(s.converged);
}

TEST(SmoothKnn, MatchesBisectionOracleOnRandomDistances) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> d(2 + trial % 20);
    for (double& v : d) v = u(rng);
    std::sort(d.begin(), d.end());
    const SmoothKnn s = smooth_knn(d);
    EXPECT_TRUE(s.converged);
    // k=2 only reaches log2(k) once exp underflows, so any tiny sigma works
    if (d.size() > 2) EXPECT_NEAR(s.sigma, oracle::smooth_knn_sigma(d), 1e-6 * std::max(1.0, s.sigma));
  }
}

TEST(SmoothKnn, FlagsUnreachableTargetAndRejectsSmallK) {
  // every neighbour at rho: the sum is k regardless of sigma
  const std::vector<double> d = {0.5, 0.5, 0.5, 0.5};
  EXPECT_FALSE(smooth_knn(d).converged);
  const std::vector<double> one = {1.0};
  EXPECT_TOPEMB_ERROR(smooth_knn(one), ErrorCode::InvalidArgument);
}

TEST(FuzzyGraph, SymmetrizationIsProbabilisticUnion) {
  std::mt19937_64 rng(3);
  const Matrix x = oracle::random_unit_rows(25, 4, rng);
  const FuzzyGraph g = fuzzy_graph(x, 5, Metric::Cosine);
  std::map<std::pair<std::size_t, std::size_t>, double> dir;
  for (const auto& e : g.directed) dir[{e.i, e.j}] = e.weight;
  for (const auto& e : g.symmetric) {
    ASSERT_LT(e.i, e.j);
    const double a = dir.count({e.i, e.j}) ? dir[{e.i, e.j}] : 0.0;
    const double b = dir.count({e.j, e.i}) ? dir[{e.j, e.i}] : 0.0;
    EXPECT_DOUBLE_EQ(e.weight, a + b - a * b);
    EXPECT_GT(e.weight, 0.0);
    EXPECT_LE(e.weight, 1.0);
  }
  // each point's nearest neighbour has membership exactly 1
  for (std::size_t i = 0; i < 25; ++i) {
    double best = 0.0;
    for (const auto& e : g.directed)
      if (e.i == i) best = std::max(best, e.weight);
    EXPECT_DOUBLE_EQ(best, 1.0);
  }
}

TEST(CurveFit, MatchesGridSearch) {
  for (double md : {0.05, 0.1, 0.3, 0.5}) {
    const CurveParams c = fit_ab(md);
    const auto [a, b] = oracle::fit_ab_grid(md);
    EXPECT_NEAR(c.a, a, 1e-2) << md;
    EXPECT_NEAR(c.b, b, 1e-2) << md;
  }
  const CurveParams c = fit_ab(0.1);
  EXPECT_NEAR(c.a, 1.577, 1e-2);
  EXPECT_NEAR(c.b, 0.8951, 1e-2);
  EXPECT_TOPEMB_ERROR(fit_ab(0.0), ErrorCode::InvalidArgument);
  EXPECT_TOPEMB_ERROR(fit_ab(1.0), ErrorCode::InvalidArgument);
}

TEST(Sphere, HaversineProperties) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ulat(-kPi / 2, kPi / 2), ulon(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const LatLon p{ulat(rng), ulon(rng)}, q{ulat(rng), ulon(rng)};
    EXPECT_NEAR(haversine(p, antipode(p)), kPi, 1e-12);
    EXPECT_EQ(haversine(p, p), 0.0);
    EXPECT_NEAR(haversine(p, q), haversine(q, p), 1e-15);
    const auto v = to_unit_vector(p);
    const LatLon back = from_unit_vector(v);
    EXPECT_NEAR(haversine(p, back), 0.0, 1e-12);
    EXPECT_GE(back.lon, -kPi);
    EXPECT_LT(back.lon, kPi);
  }
  EXPECT_NEAR(haversine({0.0, 0.0}, {0.0, kPi / 2}), kPi / 2, 1e-15);
}

TEST(PairTerms, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const CurveParams c = fit_ab(0.1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::array<double, 2> q{u(rng), u(rng)};
    const std::vector<double> p0{u(rng), u(rng)};
    for (bool attractive : {true, false}) {
      auto f = [&](const std::vector<double>& p) {
        return attractive ? planar_attractive({p[0], p[1]}, q, c).value : planar_repulsive({p[0], p[1]}, q, c).value;
      };
      const PairTerm t = attractive ? planar_attractive({p0[0], p0[1]}, q, c) : planar_repulsive({p0[0], p0[1]}, q, c);
      EXPECT_LT(oracle::relative_error({t.grad[0], t.grad[1]}, oracle::numeric_gradient(f, p0)), 1e-5);
    }
    const LatLon qs{0.7 * u(rng), 1.5 * u(rng)};
    const std::vector<double> s0{0.7 * u(rng), 1.5 * u(rng)};
    for (bool attractive : {true, false}) {
      auto f = [&](const std::vector<double>& p) {
        return attractive ? sphere_attractive({p[0], p[1]}, qs, c).value : sphere_repulsive({p[0], p[1]}, qs, c).value;
      };
      const PairTerm t = attractive ? sphere_attractive({s0[0], s0[1]}, qs, c) : sphere_repulsive({s0[0], s0[1]}, qs, c);
      EXPECT_LT(oracle::relative_error({t.grad[0], t.grad[1]}, oracle::numeric_gradient(f, s0)), 1e-5);
    }
  }
}

TEST(Layout, TwoBlobsStaySeparated) {
  std::mt19937_64 rng(6);
  const Matrix x = two_blobs(60, 8, 12.0, rng);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    LayoutParams p;
    p.metric = Metric::Euclidean;
    p.seed = seed;
    const Layout lay = umap(x, p);
    EXPECT_GT(min_inter_over_mean_intra(lay.coords, 60), 1.0) << seed;
  }
}

TEST(Layout, SphereLayoutSeparatesBlobsAndStaysOnSphere) {
  std::mt19937_64 rng(7);
  const Matrix x = two_blobs(60, 8, 12.0, rng);
  LayoutParams p;
  p.metric = Metric::Euclidean;
  p.space = OutputSpace::Sphere;
  const Layout lay = umap(x, p);
  const Matrix e = lay.euclidean();
  for (std::size_t i = 0; i < e.rows(); ++i) EXPECT_NEAR(norm(e.row(i)), 1.0, 1e-12);
  // repulsion on a compact space spreads each blob over a hemisphere, so
  // check a clean split instead of a gap
  std::array<std::array<double, 3>, 2> centroid{};
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t c = 0; c < 3; ++c) centroid[i >= 60][c] += e(i, c);
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    const auto own = centroid[i >= 60], other = centroid[i < 60];
    EXPECT_GT(own[0] * e(i, 0) + own[1] * e(i, 1) + own[2] * e(i, 2),
              other[0] * e(i, 0) + other[1] * e(i, 1) + other[2] * e(i, 2))
        << i;
    for (std::size_t j = i + 1; j < e.rows(); ++j) {
      const double d = euclidean_distance(e.row(i), e.row(j));
      ((i < 60) == (j < 60) ? intra : inter) += d;
      ++((i < 60) == (j < 60) ? n_intra : n_inter);
    }
  }
  EXPECT_GT((inter / static_cast<double>(n_inter)) / (intra / static_cast<double>(n_intra)), 1.5);
}

TEST(Layout, LossDecreasesFromInit) {
  std::mt19937_64 rng(8);
  const Matrix x = two_blobs(50, 6, 8.0, rng);
  std::vector<double> ratio;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    LayoutParams p;
    p.metric = Metric::Euclidean;
    p.seed = seed;
    const FuzzyGraph g = fuzzy_graph(x, p.n_neighbors, p.metric);
    Layout init = initial_layout(x.rows(), p);
    init.curve = fit_ab(p.min_dist);
    const Layout fitted = layout(g, p);
    ratio.push_back(layout_loss(g, fitted, 1) / layout_loss(g, init, 1));
  }
  std::sort(ratio.begin(), ratio.end());
  EXPECT_LT(ratio[1], 1.0);
}

TEST(Layout, DeterministicAndDegenerateInputs) {
  std::mt19937_64 rng(9);
  const Matrix x = oracle::random_unit_rows(30, 4, rng);
  LayoutParams p;
  p.n_epochs = 50;
  EXPECT_EQ(umap(x, p).coords, umap(x, p).coords);
  p.n_epochs = 0;
  EXPECT_EQ(umap(x, p).coords, initial_layout(30, p).coords);
  // two points: k < 2, layout is the initialisation
  const Matrix two = oracle::random_unit_rows(2, 4, rng);
  p.n_epochs = 10;
  EXPECT_EQ(umap(two, p).coords, initial_layout(2, p).coords);
}

TEST(Layout, CsvRoundTrip) {
  std::mt19937_64 rng(10);
  const EmbeddingSet s = make_set(oracle::random_unit_rows(20, 4, rng), "img");
  for (OutputSpace space : {OutputSpace::Plane, OutputSpace::Sphere}) {
    LayoutParams p;
    p.n_epochs = 20;
    p.space = space;
    const Layout lay = umap(s.vectors, p);
    std::ostringstream out;
    write_layout_csv(out, lay, s);
    std::istringstream in(out.str());
    const LayoutTable t = read_layout_csv(in);
    EXPECT_EQ(t.space, space);
    EXPECT_EQ(t.coords, lay.coords);
    EXPECT_EQ(t.ids, s.ids);
  }
}

TEST(PairProjection, IdenticalPairsHaveZeroSegments) {
  std::mt19937_64 rng(11);
  const Matrix a = oracle::random_unit_rows(40, 6, rng);
  const PairedDataset ds = make_paired(make_set(a, "image"), make_set(a, "text"), "same");
  EXPECT_NEAR(pair_line_projection(ds, PairProjectionMethod::Pca2).mean_segment_length, 0.0, 1e-12);
}

TEST(Ablation, GridShape) {
  std::mt19937_64 rng(12);
  Matrix a = oracle::random_unit_rows(40, 6, rng);
  Matrix b = oracle::random_unit_rows(40, 6, rng);
  const EmbeddingSet both =
      concat_modalities(make_paired(make_set(a, "image"), make_set(b, "text"), "x"));
  LayoutParams base;
  base.n_epochs = 30;
  const std::vector<std::size_t> ks = {5, 10};
  const std::vector<double> mds = {0.1, 0.5};
  const auto cells = ablation_grid(both, ks, mds, base);
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) {
    EXPECT_GE(c.separation, 0.0);
    EXPECT_LE(c.separation, 1.0);
  }
}
