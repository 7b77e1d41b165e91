#include <benchmark/benchmark.h>

#include <random>

#include "linkpmf/auc.hpp"
#include "linkpmf/cavi.hpp"
#include "linkpmf/random.hpp"
#include "linkpmf/svd.hpp"

namespace {

using namespace linkpmf;

// Fixed edge count, growing host count: sweep time should track nnz, not
// the number of zero cells.
SparseBipartiteGraph spread_graph(std::size_t n_users, std::size_t n_hosts, std::size_t nnz,
                                  std::uint64_t seed) {
  CounterRng rng(stream_key(seed, "bench.graph"), 0);
  std::vector<Edge> edges;
  edges.reserve(nnz);
  std::uniform_int_distribution<NodeId> user(0, static_cast<NodeId>(n_users - 1));
  std::uniform_int_distribution<NodeId> host(0, static_cast<NodeId>(n_hosts - 1));
  while (edges.size() < nnz) edges.push_back({user(rng), host(rng)});
  return SparseBipartiteGraph(n_users, n_hosts, std::move(edges));
}

void BM_Sweep(benchmark::State& st) {
  const auto n_hosts = static_cast<std::size_t>(st.range(0));
  const auto graph = spread_graph(2000, n_hosts, 200000, 1);
  const CovariateMatrix users(graph.n_users()), hosts(graph.n_hosts());
  const EpmfProblem problem(graph, users, hosts);
  Hyperparameters hyper;
  hyper.latent_dim = 10;
  auto state = init_state(problem, hyper, 7);
  for (auto _ : st) benchmark::DoNotOptimize(sweep(state, problem, hyper));
  st.counters["nnz"] = static_cast<double>(graph.nnz());
  st.counters["zero_cells"] = static_cast<double>(graph.n_users() * graph.n_hosts() - graph.nnz());
}
BENCHMARK(BM_Sweep)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  CounterRng rng(stream_key(3, "bench.auc"), 0);
  std::vector<ScoredPair> pairs(n);
  for (std::size_t k = 0; k < n; ++k) {
    pairs[k].score = rng.uniform();
    pairs[k].label = k % 4 == 0;
  }
  for (auto _ : st) benchmark::DoNotOptimize(compute_auc(pairs).auc);
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * n));
}
BENCHMARK(BM_Auc)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_TruncatedSvd(benchmark::State& st) {
  const auto graph = spread_graph(5000, 3000, 100000, 2);
  SvdOptions options;
  options.method = st.range(0) == 0 ? SvdMethod::kRandomized : SvdMethod::kLanczos;
  options.max_steps = 400;
  for (auto _ : st) benchmark::DoNotOptimize(truncated_svd(graph, 20, options).values(0));
  st.SetLabel(st.range(0) == 0 ? "randomized" : "lanczos");
}
BENCHMARK(BM_TruncatedSvd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
