#include <benchmark/benchmark.h>

#include "latscope/counting.hpp"
#include "latscope/dioph.hpp"
#include "latscope/lattice.hpp"
#include "latscope/rng.hpp"

using namespace latscope;

namespace {

Lattice Z(int n) { return make_lattice(Mat::Identity(n, n)); }

Dilation diag23() {
  Mat M(2, 2);
  M << 2, 0, 0, 3;
  return make_dilation(M);
}

void BM_EnumerateBall(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double r = static_cast<double>(state.range(1));
  Lattice L = Z(n);
  Mat I = Mat::Identity(n, n);
  for (auto _ : state) {
    auto pts = enumerate_in_ellipsoid(L, I, r);
    benchmark::DoNotOptimize(pts.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EnumerateBall)->Args({2, 20})->Args({3, 8})->Args({4, 5});

void BM_CountDilated(benchmark::State& state) {
  const long long j = state.range(0);
  Lattice L = Z(2);
  Dilation A = diag23();
  for (auto _ : state) {
    long long c = count_in_dilated_ball(L, A, j, 1.0);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_CountDilated)->Arg(0)->Arg(4)->Arg(8);

void BM_CountProfile(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  Lattice L = Z(2);
  Dilation A = diag23();
  for (auto _ : state) {
    CountProfile p = count_profile(A, L, 2.0, -20, 20, threads);
    benchmark::DoNotOptimize(p.rows.data());
  }
}
BENCHMARK(BM_CountProfile)->Arg(1)->Arg(8);

void BM_ShortestVector(benchmark::State& state) {
  Philox g(99, 0);
  Mat G(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) G(i, k) = 4.0 * g.uniform01() - 2.0;
  Lattice L = make_lattice(G);
  for (auto _ : state) {
    ShortestVec v = shortest_vector(L);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ShortestVector);

void BM_NuScanRadius(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0));
  Mat G(2, 2);
  G << 1, std::sqrt(2.0), 1, -std::sqrt(2.0);
  Lattice L = make_lattice(G);
  for (auto _ : state) {
    NuResult r = nu(L, rho);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_NuScanRadius)->Arg(10)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
