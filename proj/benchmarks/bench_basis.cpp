// SPDX-License-Identifier: MIT
#include <benchmark/benchmark.h>

#include "pcnn/basis.hpp"
#include "pcnn/problems.hpp"

namespace {

pcnn::OrthonormalBasis make_basis(int p) {
  const auto problem = pcnn::cantilever_tube_problem();
  const auto pool = pcnn::sample(problem.inputs, 20000,
                                 pcnn::SampleKind::LatinHypercube, 42);
  auto families = pcnn::univariate_bases(problem.inputs, pool.data, p,
                                         pcnn::MomentSource::Empirical);
  return pcnn::tensor_basis(std::move(families), p);
}

void BM_ApcConstruction(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto problem = pcnn::cantilever_tube_problem();
  const auto pool = pcnn::sample(problem.inputs, 20000,
                                 pcnn::SampleKind::LatinHypercube, 42);
  for (auto _ : state) {
    auto families = pcnn::univariate_bases(problem.inputs, pool.data, p,
                                           pcnn::MomentSource::Empirical);
    benchmark::DoNotOptimize(families);
  }
}
BENCHMARK(BM_ApcConstruction)->Arg(2)->Arg(4)->Arg(6);

void BM_EvalBasisBatch(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto basis = make_basis(p);
  const auto problem = pcnn::cantilever_tube_problem();
  const auto batch = pcnn::sample(problem.inputs, 1024,
                                  pcnn::SampleKind::MonteCarlo, 7);
  for (auto _ : state) {
    auto phi = basis.eval_matrix(batch.data);
    benchmark::DoNotOptimize(phi.data());
  }
  state.SetItemsProcessed(state.iterations() * batch.data.rows());
}
BENCHMARK(BM_EvalBasisBatch)->Arg(2)->Arg(4);

void BM_MultiIndices(benchmark::State& state) {
  for (auto _ : state) {
    auto set = pcnn::multi_indices(9, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(set.indices.data());
  }
}
BENCHMARK(BM_MultiIndices)->Arg(4)->Arg(6);

}  // namespace
