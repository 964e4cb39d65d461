#include <benchmark/benchmark.h>

#include <array>

#include "fastsum/dataset.hpp"
#include "fastsum/fgt.hpp"

using namespace fastsum;
using namespace fastsum::fgt;

namespace {

constexpr double kSigma = 0.1;

std::vector<GaussianSource> cluster_sources(int count, int d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double half = 0.25 * kSigma;
  std::vector<GaussianSource> out(static_cast<std::size_t>(count));
  for (auto& s : out) {
    for (int j = 0; j < d; ++j) {
      s.position[static_cast<std::size_t>(j)] = half * (2.0 * rng.next_unit() - 1.0);
    }
    s.weight = 2.0 * rng.next_unit() - 1.0;
  }
  return out;
}

void BM_HermiteCoeffs(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const auto sources = cluster_sources(64, d, 3);
  const std::array<double, 3> center{};
  for (auto _ : state) {
    auto he = hermite_coeffs<double>(sources, center, p, d, kSigma);
    benchmark::DoNotOptimize(he.coeffs.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}

template <HermiteBackend Backend>
void BM_HermiteEval(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const auto sources = cluster_sources(64, d, 4);
  const std::array<double, 3> center{};
  const auto he = hermite_coeffs<double>(sources, center, p, d, kSigma);
  const std::array<double, 3> y{2.0 * kSigma, kSigma, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hermite_eval<double>(he, y, p, d, kSigma, Backend));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_H2tTranslate(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const auto sources = cluster_sources(64, d, 5);
  const std::array<double, 3> center{};
  const auto he = hermite_coeffs<double>(sources, center, p, d, kSigma);
  const std::array<double, 3> tc{4.0 * kSigma, 0.0, 0.0};
  for (auto _ : state) {
    auto te = h2t_translate<double>(he, tc, p, d, kSigma);
    benchmark::DoNotOptimize(te.coeffs.data());
  }
  state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_HermiteCoeffs)->Args({5, 2})->Args({9, 2})->Args({12, 2})->Args({9, 3});
BENCHMARK_TEMPLATE(BM_HermiteEval, HermiteBackend::recurrence)
    ->Args({5, 2})->Args({9, 2})->Args({12, 2});
BENCHMARK_TEMPLATE(BM_HermiteEval, HermiteBackend::horner_table)
    ->Args({5, 2})->Args({9, 2})->Args({12, 2});
BENCHMARK(BM_H2tTranslate)->Args({9, 2})->Args({12, 2})->Args({9, 3});

BENCHMARK_MAIN();
