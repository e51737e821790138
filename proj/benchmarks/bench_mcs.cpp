// SPDX-License-Identifier: MIT
#include <benchmark/benchmark.h>

#include "pcnn/analyze.hpp"
#include "pcnn/problems.hpp"
#include "pcnn/rng.hpp"

namespace {

void BM_SampleLhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto problem = pcnn::cantilever_tube_problem();
  for (auto _ : state) {
    auto s = pcnn::sample(problem.inputs, n, pcnn::SampleKind::LatinHypercube, 3);
    benchmark::DoNotOptimize(s.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SampleLhs)->Arg(20000)->Arg(100000);

void BM_TrueFunctionMcs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto problem = pcnn::cantilever_tube_problem();
  const auto fn = pcnn::as_standardized_fn(problem);
  for (auto _ : state) {
    auto r = pcnn::failure_probability(fn, problem.inputs, n, 11);
    benchmark::DoNotOptimize(r.pf);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TrueFunctionMcs)->Arg(100000);

void BM_SurrogateMcs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto problem = pcnn::cantilever_tube_problem();
  const auto pool = pcnn::sample(problem.inputs, 20000,
                                 pcnn::SampleKind::LatinHypercube, 42);
  auto families = pcnn::univariate_bases(problem.inputs, pool.data, 4,
                                         pcnn::MomentSource::Empirical);
  pcnn::PceModel model;
  model.basis = pcnn::tensor_basis(std::move(families), 4);
  pcnn::Xoshiro256 rng(5);
  model.coeffs.resize(static_cast<Eigen::Index>(model.basis.size()));
  for (Eigen::Index i = 0; i < model.coeffs.size(); ++i)
    model.coeffs(i) = 2.0 * rng.next_unit() - 1.0;
  for (auto _ : state) {
    auto r = pcnn::failure_probability(model, problem.inputs, n, 11);
    benchmark::DoNotOptimize(r.pf);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SurrogateMcs)->Arg(100000);

}  // namespace
