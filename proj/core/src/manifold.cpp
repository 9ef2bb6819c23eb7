#include "topemb/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"
#include "topemb/parallel.hpp"
#include "topemb/separability.hpp"

namespace topemb {

namespace {

using Vec3 = std::array<double, 3>;

constexpr double kPi = std::numbers::pi;
constexpr double kGradClip = 4.0;
constexpr double kRepulsiveEps = 1e-3;
// Tangent-plane steps on the unit sphere are scaled down relative to the
// plane, whose initial layout spans [0, 10].
constexpr double kSphereStepScale = 0.1;

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double angle_between(const Vec3& p, const Vec3& q) {
  const Vec3 c = cross3(p, q);
  return std::atan2(std::sqrt(dot3(c, c)), dot3(p, q));
}

Vec3 normalized(Vec3 v) {
  const double n = std::sqrt(dot3(v, v));
  for (double& x : v) x /= n;
  return v;
}

double clip(double v) { return std::clamp(v, -kGradClip, kGradClip); }

// dL/ds for s = d^2.
double attractive_ds(double s, CurveParams c) {
  if (s <= 0.0) return 0.0;
  const double sb = std::pow(s, c.b);
  return c.a * c.b * std::pow(s, c.b - 1.0) / (1.0 + c.a * sb);
}

double repulsive_ds(double s, CurveParams c, double eps) {
  if (s <= 0.0 && eps <= 0.0) return 0.0;
  return -c.b / ((s + eps) * (1.0 + c.a * std::pow(s, c.b)));
}

double attractive_value(double s, CurveParams c) { return std::log1p(c.a * std::pow(s, c.b)); }

double repulsive_value(double s, CurveParams c) {
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  const double asb = c.a * std::pow(s, c.b);
  return std::log1p(asb) - std::log(asb);
}

// Tangent gradient at p of L(d(p, q)^2) given dL/ds.
Vec3 sphere_gradient(const Vec3& p, const Vec3& q, double dlds) {
  const Vec3 c = cross3(p, q);
  const double sin_d = std::sqrt(dot3(c, c));
  const double cos_d = dot3(p, q);
  const double d = std::atan2(sin_d, cos_d);
  if (sin_d < 1e-300 || dlds == 0.0) return {0.0, 0.0, 0.0};
  const double scale = -2.0 * d * dlds / sin_d;
  return {scale * (q[0] - cos_d * p[0]), scale * (q[1] - cos_d * p[1]), scale * (q[2] - cos_d * p[2])};
}

std::array<double, 2> to_latlon_gradient(LatLon p, const Vec3& g) {
  const double sl = std::sin(p.lat), cl = std::cos(p.lat);
  const double so = std::sin(p.lon), co = std::cos(p.lon);
  const Vec3 d_lat{-sl * co, -sl * so, cl};
  const Vec3 d_lon{-cl * so, cl * co, 0.0};
  return {dot3(g, d_lat), dot3(g, d_lon)};
}

}  // namespace

OutputSpace parse_output_space(std::string_view name) {
  if (name == "plane") return OutputSpace::Plane;
  if (name == "haversine" || name == "sphere") return OutputSpace::Sphere;
  throw Error(ErrorCode::InvalidArgument, "unknown output metric '" + std::string(name) + "'");
}

std::string_view to_string(OutputSpace space) {
  return space == OutputSpace::Plane ? "plane" : "haversine";
}

KnnGraph knn_graph(const Matrix& points, std::size_t k, Metric metric) {
  const std::size_t n = points.rows();
  if (k < 1 || k >= n)
    throw Error(ErrorCode::KTooLarge, "kNN needs 1 <= k < N (k=" + std::to_string(k) +
                                          ", N=" + std::to_string(n) + ")");
  KnnGraph g;
  g.n_points = n;
  g.k = k;
  g.indices.resize(n * k);
  g.distances.resize(n * k);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(distance(points.row(i), points.row(j), metric), j);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t m = 0; m < k; ++m) {
      g.distances[i * k + m] = cand[m].first;
      g.indices[i * k + m] = cand[m].second;
    }
  });
  return g;
}

SmoothKnn smooth_knn(std::span<const double> distances) {
  const std::size_t k = distances.size();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "smooth_knn needs at least 2 distances");
  SmoothKnn out;
  out.rho = 0.0;
  for (double d : distances) {
    if (d > 0.0) {
      out.rho = d;
      break;
    }
  }
  const double target = std::log2(static_cast<double>(k));
  auto membership_sum = [&](double sigma) {
    double s = 0.0;
    for (double d : distances) s += std::exp(-std::max(0.0, d - out.rho) / sigma);
    return s;
  };
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double mid = 1.0;
  for (int it = 0; it < kSmoothKnnIterations; ++it) {
    const double s = membership_sum(mid);
    if (s == target) break;
    if (s > target) {
      hi = mid;
      mid = 0.5 * (lo + hi);
    } else {
      lo = mid;
      mid = std::isinf(hi) ? 2.0 * mid : 0.5 * (lo + hi);
    }
  }
  out.sigma = mid;
  out.converged = std::abs(membership_sum(mid) - target) <= kSmoothKnnTolerance;
  return out;
}

FuzzyGraph fuzzy_graph(const KnnGraph& knn) {
  FuzzyGraph g;
  g.n_points = knn.n_points;
  g.rho.resize(knn.n_points);
  g.sigma.resize(knn.n_points);
  g.sigma_flagged.resize(knn.n_points);
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < knn.n_points; ++i) {
    const auto dist = knn.neighbor_distances(i);
    const auto sk = smooth_knn(dist);
    g.rho[i] = sk.rho;
    g.sigma[i] = sk.sigma;
    g.sigma_flagged[i] = sk.converged ? 0 : 1;
    const auto nbr = knn.neighbors(i);
    for (std::size_t m = 0; m < knn.k; ++m) {
      const double w = std::exp(-std::max(0.0, dist[m] - sk.rho) / sk.sigma);
      if (!(w > 0.0)) continue;
      const std::size_t j = nbr[m];
      g.directed.push_back({i, j, w});
      auto& slot = pairs[{std::min(i, j), std::max(i, j)}];
      (i < j ? slot.first : slot.second) = w;
    }
  }
  for (const auto& [key, w] : pairs)
    g.symmetric.push_back({key.first, key.second, w.first + w.second - w.first * w.second});
  return g;
}

FuzzyGraph fuzzy_graph(const Matrix& points, std::size_t k, Metric metric) {
  return fuzzy_graph(knn_graph(points, k, metric));
}

CurveParams fit_ab(double min_dist, double spread) {
  if (!(min_dist > 0.0 && min_dist < 1.0))
    throw Error(ErrorCode::InvalidArgument, "min_dist must be in (0, 1)");
  constexpr std::size_t kSamples = 300;
  std::vector<double> xs(kSamples), ys(kSamples);
  for (std::size_t i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * spread * static_cast<double>(i) / static_cast<double>(kSamples - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto residual_norm = [&](double a, double b) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < kSamples; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      r2 += r * r;
    }
    return r2;
  };

  // Levenberg-Marquardt on (a, b).
  double a = 1.0, b = 1.0, damping = 1e-3;
  double cost = residual_norm(a, b);
  bool converged = false;
  for (int it = 0; it < 1000 && !converged; ++it) {
    double jtj[2][2] = {{0, 0}, {0, 0}};
    double jtr[2] = {0, 0};
    for (std::size_t i = 0; i < kSamples; ++i) {
      const double x = xs[i];
      const double x2b = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double den = 1.0 + a * x2b;
      const double f = 1.0 / den;
      const double r = f - ys[i];
      const double da = -x2b / (den * den);
      const double db = x > 0.0 ? -a * x2b * 2.0 * std::log(x) / (den * den) : 0.0;
      jtj[0][0] += da * da;
      jtj[0][1] += da * db;
      jtj[1][1] += db * db;
      jtr[0] += da * r;
      jtr[1] += db * r;
    }
    jtj[1][0] = jtj[0][1];
    for (int attempt = 0; attempt < 50; ++attempt) {
      const double m00 = jtj[0][0] * (1.0 + damping);
      const double m11 = jtj[1][1] * (1.0 + damping);
      const double det = m00 * m11 - jtj[0][1] * jtj[1][0];
      const double step_a = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
      const double step_b = -(-jtj[1][0] * jtr[0] + m00 * jtr[1]) / det;
      const double na = a + step_a, nb = b + step_b;
      const double ncost = (na > 0.0 && nb > 0.0) ? residual_norm(na, nb)
                                                  : std::numeric_limits<double>::infinity();
      if (ncost <= cost) {
        converged = std::abs(step_a) <= 1e-12 * (1.0 + a) && std::abs(step_b) <= 1e-12 * (1.0 + b);
        converged = converged || cost - ncost <= 1e-16 * cost;
        a = na;
        b = nb;
        cost = ncost;
        damping = std::max(damping * 0.3, 1e-12);
        break;
      }
      damping *= 10.0;
      if (attempt == 49) converged = true;  // no downhill step left
    }
  }
  if (!converged || !(a > 0.0 && b > 0.0))
    throw Error(ErrorCode::NoConvergence, "curve fit for min_dist did not converge");
  return {a, b};
}

double low_dim_similarity(double distance, CurveParams curve) {
  if (distance <= 0.0) return 1.0;
  return 1.0 / (1.0 + curve.a * std::pow(distance, 2.0 * curve.b));
}

std::array<double, 3> to_unit_vector(LatLon p) {
  const double cl = std::cos(p.lat);
  return {cl * std::cos(p.lon), cl * std::sin(p.lon), std::sin(p.lat)};
}

LatLon from_unit_vector(const std::array<double, 3>& v) {
  LatLon p;
  p.lat = std::atan2(v[2], std::hypot(v[0], v[1]));
  p.lon = std::atan2(v[1], v[0]);
  if (p.lon >= kPi) p.lon -= 2.0 * kPi;
  return p;
}

LatLon antipode(LatLon p) {
  LatLon q{-p.lat, p.lon + kPi};
  if (q.lon >= kPi) q.lon -= 2.0 * kPi;
  return q;
}

double haversine(LatLon p, LatLon q) { return angle_between(to_unit_vector(p), to_unit_vector(q)); }

PairTerm planar_attractive(std::array<double, 2> p, std::array<double, 2> q, CurveParams c) {
  const double dx = p[0] - q[0], dy = p[1] - q[1];
  const double s = dx * dx + dy * dy;
  const double g = 2.0 * attractive_ds(s, c);
  return {attractive_value(s, c), {g * dx, g * dy}};
}

PairTerm planar_repulsive(std::array<double, 2> p, std::array<double, 2> q, CurveParams c, double eps) {
  const double dx = p[0] - q[0], dy = p[1] - q[1];
  const double s = dx * dx + dy * dy;
  const double g = 2.0 * repulsive_ds(s, c, eps);
  return {repulsive_value(s, c), {g * dx, g * dy}};
}

PairTerm sphere_attractive(LatLon p, LatLon q, CurveParams c) {
  const Vec3 p3 = to_unit_vector(p), q3 = to_unit_vector(q);
  const double d = angle_between(p3, q3);
  return {attractive_value(d * d, c), to_latlon_gradient(p, sphere_gradient(p3, q3, attractive_ds(d * d, c)))};
}

PairTerm sphere_repulsive(LatLon p, LatLon q, CurveParams c, double eps) {
  const Vec3 p3 = to_unit_vector(p), q3 = to_unit_vector(q);
  const double d = angle_between(p3, q3);
  return {repulsive_value(d * d, c),
          to_latlon_gradient(p, sphere_gradient(p3, q3, repulsive_ds(d * d, c, eps)))};
}

Matrix Layout::euclidean() const {
  if (space == OutputSpace::Plane) return coords;
  Matrix out(coords.rows(), 3);
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    const auto v = to_unit_vector({coords(i, 0), coords(i, 1)});
    for (std::size_t c = 0; c < 3; ++c) out(i, c) = v[c];
  }
  return out;
}

Layout initial_layout(std::size_t n_points, const LayoutParams& params) {
  Layout out;
  out.space = params.space;
  out.params = params;
  out.coords = Matrix(n_points, 2);
  std::mt19937_64 rng(params.seed);
  if (params.space == OutputSpace::Plane) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (double& v : out.coords.data()) v = u(rng);
  } else {
    std::uniform_real_distribution<double> uz(-1.0, 1.0);
    std::uniform_real_distribution<double> ul(-kPi, kPi);
    for (std::size_t i = 0; i < n_points; ++i) {
      out.coords(i, 0) = std::asin(uz(rng));
      out.coords(i, 1) = ul(rng);
    }
  }
  return out;
}

Layout layout(const FuzzyGraph& graph, const LayoutParams& params) {
  Layout out = initial_layout(graph.n_points, params);
  out.curve = fit_ab(params.min_dist);
  const CurveParams curve = out.curve;
  const std::size_t n = graph.n_points;
  if (graph.symmetric.empty() || params.n_epochs == 0) return out;

  // Both orientations of every undirected edge, weak edges dropped.
  double max_w = 0.0;
  for (const auto& e : graph.symmetric) max_w = std::max(max_w, e.weight);
  const double min_w = max_w / static_cast<double>(params.n_epochs);
  std::vector<std::pair<std::size_t, std::size_t>> heads_tails;
  std::vector<double> epochs_per_sample;
  for (const auto& e : graph.symmetric) {
    if (e.weight < min_w) continue;
    for (auto [h, t] : {std::pair{e.i, e.j}, std::pair{e.j, e.i}}) {
      heads_tails.emplace_back(h, t);
      epochs_per_sample.push_back(max_w / e.weight);
    }
  }
  const std::size_t m = heads_tails.size();
  std::vector<double> next_sample = epochs_per_sample;
  std::vector<double> neg_per_sample(m), next_neg(m);
  for (std::size_t e = 0; e < m; ++e) {
    neg_per_sample[e] = epochs_per_sample[e] / params.negative_sample_rate;
    next_neg[e] = neg_per_sample[e];
  }

  const bool sphere = params.space == OutputSpace::Sphere;
  std::vector<Vec3> pos3;
  if (sphere) {
    pos3.resize(n);
    for (std::size_t i = 0; i < n; ++i) pos3[i] = to_unit_vector({out.coords(i, 0), out.coords(i, 1)});
  }
  std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);

  auto move_sphere = [&](std::size_t i, const Vec3& grad, double step) {
    Vec3 p = pos3[i];
    for (std::size_t c = 0; c < 3; ++c) p[c] -= step * clip(grad[c]);
    pos3[i] = normalized(p);
  };

  for (std::size_t epoch = 0; epoch < params.n_epochs; ++epoch) {
    const double alpha = params.learning_rate *
                         (1.0 - static_cast<double>(epoch) / static_cast<double>(params.n_epochs));
    const double ep = static_cast<double>(epoch);
    for (std::size_t e = 0; e < m; ++e) {
      if (next_sample[e] > ep) continue;
      const auto [j, k] = heads_tails[e];
      if (sphere) {
        const double d = angle_between(pos3[j], pos3[k]);
        const double dlds = attractive_ds(d * d, curve);
        const Vec3 gj = sphere_gradient(pos3[j], pos3[k], dlds);
        const Vec3 gk = sphere_gradient(pos3[k], pos3[j], dlds);
        move_sphere(j, gj, alpha * kSphereStepScale);
        move_sphere(k, gk, alpha * kSphereStepScale);
      } else {
        auto pj = out.coords.row(j);
        auto pk = out.coords.row(k);
        const double dx = pj[0] - pk[0], dy = pj[1] - pk[1];
        const double g = 2.0 * attractive_ds(dx * dx + dy * dy, curve);
        const double gx = clip(g * dx), gy = clip(g * dy);
        pj[0] -= alpha * gx;
        pj[1] -= alpha * gy;
        pk[0] += alpha * gx;
        pk[1] += alpha * gy;
      }
      next_sample[e] += epochs_per_sample[e];

      const auto n_neg = static_cast<std::size_t>(std::max(0.0, (ep - next_neg[e]) / neg_per_sample[e]));
      for (std::size_t s = 0; s < n_neg; ++s) {
        const std::size_t r = static_cast<std::size_t>(rng() % n);
        if (r == j) continue;
        if (sphere) {
          const double d = angle_between(pos3[j], pos3[r]);
          const Vec3 g = sphere_gradient(pos3[j], pos3[r], repulsive_ds(d * d, curve, kRepulsiveEps));
          move_sphere(j, g, alpha * kSphereStepScale);
        } else {
          auto pj = out.coords.row(j);
          auto pr = out.coords.row(r);
          const double dx = pj[0] - pr[0], dy = pj[1] - pr[1];
          const double s2 = dx * dx + dy * dy;
          if (s2 <= 0.0) continue;
          const double g = 2.0 * repulsive_ds(s2, curve, kRepulsiveEps);
          pj[0] -= alpha * clip(g * dx);
          pj[1] -= alpha * clip(g * dy);
        }
      }
      next_neg[e] += static_cast<double>(n_neg) * neg_per_sample[e];
    }
  }
  if (sphere) {
    for (std::size_t i = 0; i < n; ++i) {
      const LatLon p = from_unit_vector(pos3[i]);
      out.coords(i, 0) = p.lat;
      out.coords(i, 1) = p.lon;
    }
  }
  return out;
}

Layout umap(const Matrix& points, const LayoutParams& params) {
  const std::size_t n = points.rows();
  const std::size_t k = std::min(params.n_neighbors, n == 0 ? 0 : n - 1);
  if (k < 2) {
    FuzzyGraph empty;
    empty.n_points = n;
    return layout(empty, params);
  }
  return layout(fuzzy_graph(points, k, params.metric), params);
}

double layout_loss(const FuzzyGraph& graph, const Layout& lay, std::uint64_t seed, std::size_t negatives) {
  const CurveParams curve = lay.curve.a > 0.0 ? lay.curve : fit_ab(lay.params.min_dist);
  const Matrix pts = lay.euclidean();
  auto dist = [&](std::size_t i, std::size_t j) {
    if (lay.space == OutputSpace::Plane) return euclidean_distance(pts.row(i), pts.row(j));
    return angle_between({pts(i, 0), pts(i, 1), pts(i, 2)}, {pts(j, 0), pts(j, 1), pts(j, 2)});
  };
  constexpr double kTiny = 1e-12;
  auto neg_log = [&](double v) { return -std::log(std::clamp(v, kTiny, 1.0)); };
  std::mt19937_64 rng(seed);
  const std::size_t n = graph.n_points;
  double loss = 0.0;
  // Edges are visited in proportion to their weight and each visit draws
  // `negatives` repulsive pairs, so both parts carry the edge weight.
  for (const auto& e : graph.symmetric) {
    const double q = low_dim_similarity(dist(e.i, e.j), curve);
    loss += e.weight * neg_log(q);
    for (std::size_t s = 0; s < negatives; ++s) {
      const std::size_t r = static_cast<std::size_t>(rng() % n);
      if (r == e.i) continue;
      loss += e.weight * neg_log(1.0 - low_dim_similarity(dist(e.i, r), curve));
    }
  }
  return loss;
}

PairProjection pair_line_projection(const PairedDataset& ds, PairProjectionMethod method,
                                    const LayoutParams& params) {
  const std::size_t n = ds.count();
  const Matrix stacked = vstack(ds.a.vectors, ds.b.vectors);
  Matrix coords;
  if (method == PairProjectionMethod::Pca2) {
    coords = pca_project(stacked, 2).projection;
  } else {
    LayoutParams p = params;
    p.space = OutputSpace::Plane;
    coords = umap(stacked, p).coords;
  }
  PairProjection out;
  out.a = Matrix(n, 2);
  out.b = Matrix(n, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      out.a(i, c) = coords(i, c);
      out.b(i, c) = coords(n + i, c);
    }
    total += euclidean_distance(out.a.row(i), out.b.row(i));
  }
  out.mean_segment_length = total / static_cast<double>(n);
  return out;
}

double layout_separation(const Layout& lay, const EmbeddingSet& set, std::uint64_t seed) {
  Matrix x = lay.euclidean();
  const auto mean = column_means(x);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, c) - mean[c]) * (x(r, c) - mean[c]);
    const double sd = std::sqrt(var / static_cast<double>(x.rows()));
    for (std::size_t r = 0; r < x.rows(); ++r) x(r, c) = sd > 0.0 ? (x(r, c) - mean[c]) / sd : 0.0;
  }
  std::vector<int> y(set.count());
  for (std::size_t i = 0; i < set.count(); ++i) y[i] = set.modality_of(i) == set.modality_of(0) ? 1 : -1;
  SvmParams svm;
  svm.seed = seed;
  return split_and_score(x, y, 0.8, svm).accuracy;
}

std::vector<AblationCell> ablation_grid(const EmbeddingSet& set, std::span<const std::size_t> k_values,
                                        std::span<const double> min_dist_values, const LayoutParams& base) {
  if (k_values.empty() || min_dist_values.empty())
    throw Error(ErrorCode::InvalidArgument, "ablation grid axes must be nonempty");
  std::vector<AblationCell> cells;
  for (std::size_t k : k_values) {
    for (double md : min_dist_values) {
      LayoutParams p = base;
      p.n_neighbors = k;
      p.min_dist = md;
      if (k >= set.count()) throw Error(ErrorCode::KTooLarge, "n_neighbors must be < N");
      AblationCell cell;
      cell.n_neighbors = k;
      cell.min_dist = md;
      cell.layout = umap(set.vectors, p);
      cell.separation = layout_separation(cell.layout, set, base.seed);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_layout_csv(std::ostream& out, const Layout& lay, const EmbeddingSet& set) {
  out << (lay.space == OutputSpace::Plane ? "id,modality,x,y\n" : "id,modality,lat,lon\n");
  for (std::size_t i = 0; i < lay.size(); ++i)
    out << set.ids[i] << ',' << csv_escape(set.modality_of(i)) << ',' << format_double(lay.coords(i, 0))
        << ',' << format_double(lay.coords(i, 1)) << '\n';
}

LayoutTable read_layout_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  LayoutTable out;
  std::string c0 = "x", c1 = "y";
  if (std::find(t.header.begin(), t.header.end(), "lat") != t.header.end()) {
    out.space = OutputSpace::Sphere;
    c0 = "lat";
    c1 = "lon";
  }
  t.require_columns({"id", "modality"});
  out.coords = Matrix(t.rows.size(), 2);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.ids.push_back(parse_int(t.at(r, "id")));
    out.modality.push_back(t.at(r, "modality"));
    out.coords(r, 0) = parse_double(t.at(r, c0));
    out.coords(r, 1) = parse_double(t.at(r, c1));
  }
  return out;
}

}  // namespace topemb
