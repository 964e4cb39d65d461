#include <benchmark/benchmark.h>

#include <complex>

#include "fastsum/dataset.hpp"
#include "fastsum/fmm.hpp"

using namespace fastsum;
using namespace fastsum::fmm;

namespace {

template <class Real>
MultipoleExpansionT<Real> make_me(int p, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MultipoleExpansionT<Real> me;
  me.center = {Real(0), Real(0)};
  me.coeffs.resize(static_cast<std::size_t>(p));
  for (auto& c : me.coeffs) {
    c = {static_cast<Real>(2.0 * rng.next_unit() - 1.0),
         static_cast<Real>(2.0 * rng.next_unit() - 1.0)};
  }
  return me;
}

template <class Real, Traversal Trav>
void BM_M2lTranslate(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto me = make_me<Real>(p, 1);
  const std::complex<Real> local{Real(3), Real(1)};
  for (auto _ : state) {
    auto le = m2l_translate(me, local, p, Trav);
    benchmark::DoNotOptimize(le.coeffs.data());
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["ops_per_translation"] =
      static_cast<double>(m2l_ops_per_translation(p));
}

void BM_M2lBatch(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int level = 5;
  const auto plan = idealized_periodic_plan(level);
  GridDecomposition grid;
  grid.level = level;
  grid.boxes_per_side = 1 << level;
  grid.box_width = 1.0 / grid.boxes_per_side;
  const auto n_boxes = static_cast<std::size_t>(grid.box_count());
  std::vector<MultipoleExpansion> mes(n_boxes);
  std::vector<std::complex<double>> centers(n_boxes);
  for (std::size_t b = 0; b < n_boxes; ++b) {
    centers[b] = grid.box_center(static_cast<int>(b));
    mes[b] = make_me<double>(p, b + 7);
    mes[b].center = centers[b];
  }
  for (auto _ : state) {
    auto res = m2l_batch<double>(plan, mes, centers, p, Traversal::row,
                                 static_cast<int>(state.range(1)));
    benchmark::DoNotOptimize(res.locals.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan.pairs.size()));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_M2lTranslate, double, Traversal::row)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK_TEMPLATE(BM_M2lTranslate, double, Traversal::diagonal)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK_TEMPLATE(BM_M2lTranslate, float, Traversal::row)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(BM_M2lBatch)->Args({8, 1})->Args({8, 2})->Args({16, 1})->Args({16, 2})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
