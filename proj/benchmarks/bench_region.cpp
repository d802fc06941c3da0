#include <benchmark/benchmark.h>

#include "latscope/json_io.hpp"
#include "latscope/region.hpp"
#include "latscope/rng.hpp"
#include "latscope/spectral.hpp"
#include "latscope/wavelet.hpp"

using namespace latscope;

namespace {

Dilation diag23() {
  Mat M(2, 2);
  M << 2, 0, 0, 3;
  return make_dilation(M);
}

void BM_RegionContains(benchmark::State& state) {
  Dilation d = diag23();
  Region S = tiling_annulus(d);
  BoundingBox bb = S.bounding_box();
  std::vector<Vec> pts;
  for (std::uint64_t i = 0; i < 4096; ++i) {
    auto h = halton_point(i, 2);
    Vec x(2);
    for (int k = 0; k < 2; ++k) x(k) = bb.lo(k) + h[k] * (bb.hi(k) - bb.lo(k));
    pts.push_back(x);
  }
  std::size_t k = 0;
  for (auto _ : state) {
    bool in = S.contains(pts[k++ & 4095]);
    benchmark::DoNotOptimize(in);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RegionContains);

void BM_MeasureMc(benchmark::State& state) {
  Dilation d = diag23();
  Region S = tiling_annulus(d);
  McOptions opt;
  opt.n_samples = state.range(0);
  opt.seed = 31;
  for (auto _ : state) {
    MeasureEstimate m = measure_mc(S, S.bounding_box(), opt);
    benchmark::DoNotOptimize(m.value);
  }
}
BENCHMARK(BM_MeasureMc)->Arg(10'000)->Arg(100'000);

void BM_TilingCheck(benchmark::State& state) {
  Dilation d = diag23();
  Region S = tiling_annulus(d);
  TilingSampleSpec spec;
  spec.n_samples = 2000;
  spec.seed = 17;
  for (auto _ : state) {
    auto rep = tiling_check(d, S, spec, 40);
    benchmark::DoNotOptimize(rep.single_cover_rate);
  }
}
BENCHMARK(BM_TilingCheck);

void BM_CalderonSum(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  Preset sh = preset("shannon");
  auto xs = calderon_samples(*sh.psi, *sh.dilation, 1000, J, 5);
  for (auto _ : state) {
    auto rep = calderon_sum(*sh.psi, *sh.dilation, xs, J);
    benchmark::DoNotOptimize(rep.rows.data());
  }
}
BENCHMARK(BM_CalderonSum)->Arg(30)->Arg(60);

void BM_RegionJsonRoundTrip(benchmark::State& state) {
  Dilation d = diag23();
  Region S = region_union(tiling_annulus(d), ball(Vec::Zero(2), 0.05));
  for (auto _ : state) {
    Json j = region_to_json(S);
    Region back = region_from_json(j);
    benchmark::DoNotOptimize(back);
  }
}
BENCHMARK(BM_RegionJsonRoundTrip);

}  // namespace
