#include <map>

#include <benchmark/benchmark.h>

#include "hyperfill/filling.hpp"
#include "hyperfill/kernels.hpp"

using namespace hyperfill;
using kernels::Exec;

namespace {

struct Inputs {
  FillingPtr filling;
  std::vector<int> levels;
  kernels::Csr balls, containing;
};

// Square of side n at depth 5; arg 0 picks n.
const Inputs& inputs(int n) {
  static std::map<int, Inputs> cache;
  auto [it, fresh] = cache.try_emplace(n);
  if (fresh) {
    auto& in = it->second;
    auto sp = make_space("square", {{"n", n}});
    in.filling = Filling::build(sp, 2.0, std::min(5, max_depth(*sp, 2.0)), Exec::serial);
    const auto& f = *in.filling;
    in.levels.assign(f.levels().begin(), f.levels().end());
    std::vector<std::vector<std::uint32_t>> b(f.num_vertices()), c(f.host().size());
    for (VertexId v = 0; v < f.num_vertices(); ++v) {
      b[v].assign(f.ball(v).begin(), f.ball(v).end());
      for (PointId p : f.ball(v)) c[p].push_back(v);
    }
    in.balls = kernels::Csr::from_rows(b);
    in.containing = kernels::Csr::from_rows(c);
  }
  return it->second;
}

Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::parallel : Exec::serial; }

void BM_WitnessEdges(benchmark::State& st) {
  const auto& in = inputs(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    benchmark::DoNotOptimize(kernels::witness_edges(in.levels, in.balls, in.containing, exec_of(st)));
  }
}

void BM_AllPairsBfs(benchmark::State& st) {
  const auto& in = inputs(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::all_pairs_bfs(in.filling->adjacency(), exec_of(st)));
}

void BM_FourPointRoot(benchmark::State& st) {
  const auto& in = inputs(static_cast<int>(st.range(0)));
  const auto& table = in.filling->distances();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::four_point_root(table, 0, exec_of(st)));
}

}  // namespace

// Second argument: 0 serial reference, 1 OpenMP.
BENCHMARK(BM_WitnessEdges)->ArgsProduct({{33, 65}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllPairsBfs)->ArgsProduct({{33, 65}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FourPointRoot)->ArgsProduct({{9, 17}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
