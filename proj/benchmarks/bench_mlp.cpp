// SPDX-License-Identifier: MIT
#include <benchmark/benchmark.h>

#include "pcnn/mlp.hpp"

namespace {

void BM_MlpForward(benchmark::State& state) {
  const auto rows = state.range(0);
  pcnn::Mlp net = pcnn::Mlp::uniform_init({9, 32, 64, 128, 64, 64, 55}, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(rows, 9);
  pcnn::Mlp::Cache cache;
  for (auto _ : state) {
    auto out = net.forward(x, cache);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MlpForward)->Arg(1024)->Arg(20000);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto rows = state.range(0);
  pcnn::Mlp net = pcnn::Mlp::uniform_init({9, 32, 64, 128, 64, 64, 55}, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(rows, 9);
  Eigen::MatrixXd g = Eigen::MatrixXd::Random(rows, 55) / static_cast<double>(rows);
  pcnn::Mlp::Cache cache;
  for (auto _ : state) {
    net.forward(x, cache);
    auto grads = net.backward(cache, g);
    benchmark::DoNotOptimize(grads.d_weights.data());
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1024)->Arg(20000);

}  // namespace
