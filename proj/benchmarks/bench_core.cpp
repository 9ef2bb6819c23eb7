#include <benchmark/benchmark.h>

#include <random>

#include "topemb/clustering.hpp"
#include "topemb/gaplab.hpp"
#include "topemb/manifold.hpp"
#include "topemb/retrieval.hpp"
#include "topemb/spectra.hpp"

using namespace topemb;

namespace {

Matrix unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(n, d);
  for (double& v : m.data()) v = normal(rng);
  normalize_rows(m);
  return m;
}

void BM_Jacobi(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix cov = covariance(unit_rows(4 * d, d, 1));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(cov));
}
BENCHMARK(BM_Jacobi)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_KnnGraph(benchmark::State& state) {
  const Matrix x = unit_rows(static_cast<std::size_t>(state.range(0)), 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(knn_graph(x, 15));
}
BENCHMARK(BM_KnnGraph)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MutualReachabilityMst(benchmark::State& state) {
  const Matrix x = unit_rows(static_cast<std::size_t>(state.range(0)), 32, 3);
  const auto core = core_distances(x, 5, Metric::Cosine);
  for (auto _ : state) benchmark::DoNotOptimize(mutual_reachability_mst(x, core, Metric::Cosine));
}
BENCHMARK(BM_MutualReachabilityMst)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Retrieval(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PairedDataset ds = make_paired(make_set(unit_rows(n, 64, 4), "image"), make_set(unit_rows(n, 64, 5), "text"), "b");
  const std::vector<std::size_t> ks = {1, 5};
  for (auto _ : state) benchmark::DoNotOptimize(cross_modal_retrieve(ds, Direction::AtoB, ks));
}
BENCHMARK(BM_Retrieval)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_InfoNceBatch(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const Matrix x = unit_rows(b, 16, 6), y = unit_rows(b, 16, 7);
  for (auto _ : state) benchmark::DoNotOptimize(infonce_loss(x, y, 60.0));
}
BENCHMARK(BM_InfoNceBatch)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
