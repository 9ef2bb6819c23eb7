#include "topemb/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"
#include "topemb/parallel.hpp"

namespace topemb {

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::Cosine;
  if (name == "euclidean") return Metric::Euclidean;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(Metric metric) {
  return metric == Metric::Cosine ? "cosine" : "euclidean";
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (metric == Metric::Euclidean) return euclidean_distance(a, b);
  return std::max(0.0, 1.0 - dot(a, b));
}

std::vector<double> core_distances(const Matrix& points, std::size_t k, Metric metric) {
  const std::size_t n = points.rows();
  if (k < 1 || k >= n)
    throw Error(ErrorCode::KTooLarge, "core distance needs 1 <= k < N (k=" + std::to_string(k) +
                                          ", N=" + std::to_string(n) + ")");
  std::vector<double> core(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(distance(points.row(i), points.row(j), metric));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    core[i] = d[k - 1];
  });
  return core;
}

bool edge_less(const WeightedEdge& x, const WeightedEdge& y) {
  if (x.weight != y.weight) return x.weight < y.weight;
  if (x.a != y.a) return x.a < y.a;
  return x.b < y.b;
}

std::vector<WeightedEdge> mutual_reachability_mst(const Matrix& points,
                                                  std::span<const double> core, Metric metric) {
  const std::size_t n = points.rows();
  if (core.size() != n) throw Error(ErrorCode::InvalidArgument, "core distances do not match points");
  std::vector<WeightedEdge> tree;
  if (n < 2) return tree;
  tree.reserve(n - 1);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<char> in_tree(n, 0);
  std::vector<WeightedEdge> best(n, WeightedEdge{0, 0, inf});
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t added = 1; added < n; ++added) {
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = distance(points.row(current), points.row(j), metric);
      const WeightedEdge candidate{std::min(current, j), std::max(current, j),
                                   std::max({core[current], core[j], d})};
      if (edge_less(candidate, best[j])) best[j] = candidate;
    }
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (next == n || edge_less(best[j], best[next])) next = j;
    }
    in_tree[next] = 1;
    tree.push_back(best[next]);
    current = next;
  }
  std::sort(tree.begin(), tree.end(), edge_less);
  return tree;
}

std::vector<std::size_t> CondensedTree::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{cluster};
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    for (const auto& e : edges) {
      if (e.parent != c) continue;
      if (e.child_is_cluster)
        stack.push_back(e.child);
      else
        out.push_back(e.child);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Clustering::sizes() const {
  std::vector<std::size_t> s(n_clusters, 0);
  for (int l : labels)
    if (l >= 0) ++s[static_cast<std::size_t>(l)];
  return s;
}

Clustering clustering_from_labels(std::vector<int> labels) {
  Clustering c;
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  c.n_clusters = static_cast<std::size_t>(max_label + 1);
  c.labels = std::move(labels);
  c.stabilities.assign(c.n_clusters, 0.0);
  return c;
}

namespace {

// Binary single-linkage dendrogram: leaves 0..N-1, merges N..2N-2.
struct Dendrogram {
  std::vector<std::size_t> left, right, size;
  std::vector<double> distance;
  std::size_t n_points = 0;

  bool is_leaf(std::size_t node) const { return node < n_points; }
  std::size_t node_size(std::size_t node) const { return is_leaf(node) ? 1 : size[node - n_points]; }
};

Dendrogram single_linkage(std::span<const WeightedEdge> mst, std::size_t n) {
  std::vector<WeightedEdge> edges(mst.begin(), mst.end());
  std::sort(edges.begin(), edges.end(), edge_less);
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  Dendrogram d;
  d.n_points = n;
  std::size_t next = n;
  for (const auto& e : edges) {
    const std::size_t ra = find(e.a);
    const std::size_t rb = find(e.b);
    if (ra == rb) throw Error(ErrorCode::InvalidArgument, "MST contains a cycle");
    d.left.push_back(ra);
    d.right.push_back(rb);
    d.size.push_back(d.node_size(ra) + d.node_size(rb));
    d.distance.push_back(e.weight);
    parent[ra] = parent[rb] = next;
    ++next;
  }
  return d;
}

void collect_leaves(const Dendrogram& d, std::size_t node, std::vector<std::size_t>& out) {
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    if (d.is_leaf(x)) {
      out.push_back(x);
    } else {
      stack.push_back(d.right[x - d.n_points]);
      stack.push_back(d.left[x - d.n_points]);
    }
  }
}

CondensedTree condense(const Dendrogram& d, const ClusteringParams& params) {
  const std::size_t n = d.n_points;
  const std::size_t mcs = params.min_cluster_size;
  auto lambda_of = [&](double dist) {
    return dist > 0.0 ? std::min(1.0 / dist, params.lambda_max) : params.lambda_max;
  };

  CondensedTree t;
  t.cluster_parent.push_back(-1);
  t.cluster_birth.push_back(0.0);
  t.cluster_size.push_back(n);

  // (dendrogram node, condensed cluster it belongs to)
  std::vector<std::pair<std::size_t, std::size_t>> work{{2 * n - 2, 0}};
  std::vector<std::size_t> leaves;
  auto drop_points = [&](std::size_t node, std::size_t cluster, double lambda) {
    leaves.clear();
    collect_leaves(d, node, leaves);
    for (std::size_t p : leaves)
      t.edges.push_back({cluster, p, false, t.cluster_birth[cluster], lambda, 1});
  };

  while (!work.empty()) {
    const auto [node, cluster] = work.back();
    work.pop_back();
    if (d.is_leaf(node)) {
      // Only reachable when a lone point is the whole dataset.
      t.edges.push_back({cluster, node, false, t.cluster_birth[cluster],
                         t.cluster_birth[cluster], 1});
      continue;
    }
    const std::size_t m = node - n;
    const double lambda = lambda_of(d.distance[m]);
    const std::size_t l = d.left[m];
    const std::size_t r = d.right[m];
    const bool l_big = d.node_size(l) >= mcs;
    const bool r_big = d.node_size(r) >= mcs;
    if (l_big && r_big) {
      for (std::size_t child : {l, r}) {
        const std::size_t id = t.cluster_parent.size();
        t.cluster_parent.push_back(static_cast<std::ptrdiff_t>(cluster));
        t.cluster_birth.push_back(lambda);
        t.cluster_size.push_back(d.node_size(child));
        t.edges.push_back({cluster, id, true, lambda, lambda, d.node_size(child)});
        work.emplace_back(child, id);
      }
    } else if (!l_big && !r_big) {
      drop_points(l, cluster, lambda);
      drop_points(r, cluster, lambda);
    } else if (!l_big) {
      drop_points(l, cluster, lambda);
      work.emplace_back(r, cluster);
    } else {
      drop_points(r, cluster, lambda);
      work.emplace_back(l, cluster);
    }
  }

  const std::size_t k = t.cluster_parent.size();
  std::vector<double> death(k, 0.0);
  t.cluster_stability.assign(k, 0.0);
  for (const auto& e : t.edges) {
    const double birth = t.cluster_birth[e.parent];
    if (e.child_is_cluster) {
      t.cluster_stability[e.parent] += static_cast<double>(e.child_size) * (e.lambda_birth - birth);
    } else {
      t.cluster_stability[e.parent] += e.lambda_death - birth;
      death[e.parent] = std::max(death[e.parent], e.lambda_death);
    }
  }
  // Children are created after their parents, so a reverse sweep sees every
  // child's death before the parent's.
  for (std::size_t c = k; c-- > 1;) {
    const auto p = static_cast<std::size_t>(t.cluster_parent[c]);
    death[p] = std::max(death[p], death[c]);
  }
  for (auto& e : t.edges)
    if (e.child_is_cluster) e.lambda_death = std::max(e.lambda_birth, death[e.child]);

  // No density structure at all: every merge happens at one distance.
  const bool single_level =
      d.distance.empty() || std::equal(d.distance.begin() + 1, d.distance.end(), d.distance.begin());
  t.root_eligible = n >= mcs && (params.allow_single_cluster || single_level);
  return t;
}

void select_clusters(CondensedTree& t) {
  const std::size_t k = t.cluster_parent.size();
  std::vector<std::vector<std::size_t>> children(k);
  for (std::size_t c = 1; c < k; ++c)
    children[static_cast<std::size_t>(t.cluster_parent[c])].push_back(c);
  std::vector<double> subtree(k, 0.0);
  std::vector<char> selected(k, 0);
  const std::size_t last = t.root_eligible ? 0 : 1;
  for (std::size_t c = k; c-- > last;) {
    double below = 0.0;
    for (std::size_t ch : children[c]) below += subtree[ch];
    if (!children[c].empty() && below > t.cluster_stability[c]) {
      subtree[c] = below;
    } else {
      subtree[c] = t.cluster_stability[c];
      selected[c] = 1;
      std::vector<std::size_t> stack(children[c].begin(), children[c].end());
      while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        selected[x] = 0;
        stack.insert(stack.end(), children[x].begin(), children[x].end());
      }
    }
  }
  t.selected.clear();
  for (std::size_t c = 0; c < k; ++c)
    if (selected[c]) t.selected.push_back(c);
}

}  // namespace

Clustering extract_clusters(std::span<const WeightedEdge> mst, std::size_t n_points,
                            const ClusteringParams& params) {
  if (params.min_cluster_size < 2)
    throw Error(ErrorCode::InvalidArgument, "min_cluster_size must be >= 2");
  if (n_points == 0) throw Error(ErrorCode::TooFewPoints, "no points to cluster");
  if (mst.size() + 1 != n_points)
    throw Error(ErrorCode::InvalidArgument, "MST must have N-1 edges");

  Clustering out;
  out.params = params;
  out.labels.assign(n_points, kNoise);
  if (n_points == 1) return out;

  out.tree = condense(single_linkage(mst, n_points), params);
  select_clusters(out.tree);

  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> chosen;
  for (std::size_t c : out.tree.selected) chosen.emplace_back(c, out.tree.members(c));
  std::sort(chosen.begin(), chosen.end(),
            [](const auto& x, const auto& y) { return x.second.front() < y.second.front(); });
  out.n_clusters = chosen.size();
  for (std::size_t label = 0; label < chosen.size(); ++label) {
    for (std::size_t p : chosen[label].second) out.labels[p] = static_cast<int>(label);
    out.stabilities.push_back(out.tree.cluster_stability[chosen[label].first]);
  }
  return out;
}

Clustering cluster(const Matrix& points, const ClusteringParams& params) {
  const auto core = core_distances(points, params.effective_min_samples(), params.metric);
  const auto mst = mutual_reachability_mst(points, core, params.metric);
  return extract_clusters(mst, points.rows(), params);
}

Clustering cluster(const EmbeddingSet& set, const ClusteringParams& params) {
  return cluster(set.vectors, params);
}

void write_clustering_csv(std::ostream& out, const Clustering& c, std::span<const std::int64_t> ids) {
  out << "id,label\n";
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    out << (ids.empty() ? static_cast<std::int64_t>(i) : ids[i]) << ',' << c.labels[i] << '\n';
}

std::vector<int> read_clustering_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  t.require_columns({"id", "label"});
  std::vector<int> labels;
  labels.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) labels.push_back(static_cast<int>(parse_int(t.at(r, "label"))));
  return labels;
}

std::string clustering_summary_json(const Clustering& c) {
  nlohmann::ordered_json j;
  j["n_clusters"] = c.n_clusters;
  j["n_noise"] = std::count(c.labels.begin(), c.labels.end(), kNoise);
  j["sizes"] = c.sizes();
  j["stabilities"] = c.stabilities;
  j["params"] = {{"min_cluster_size", c.params.min_cluster_size},
                 {"min_samples", c.params.effective_min_samples()},
                 {"metric", std::string(to_string(c.params.metric))},
                 {"allow_single_cluster", c.params.allow_single_cluster},
                 {"lambda_max", c.params.lambda_max}};
  return j.dump(2);
}

}  // namespace topemb
