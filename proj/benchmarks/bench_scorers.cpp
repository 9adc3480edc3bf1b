#include <random>

#include <benchmark/benchmark.h>

#include "nnb/core.hpp"
#include "nnb/data.hpp"
#include "nnb/neural.hpp"
#include "nnb/tabular.hpp"

namespace {

nnb::EmbeddedSequence random_sequence(std::size_t length, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  nnb::Vector data(length * dim);
  for (double& x : data) x = g(rng);
  return nnb::EmbeddedSequence(length, dim, std::move(data));
}

// Pooled score of a 300-d review-length sequence; range is (order, length).
void BM_PooledScore(benchmark::State& state) {
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto length = static_cast<std::size_t>(state.range(1));
  const auto scorer = nnb::PooledScorer::create(order, 300, 2, nnb::kDefaultHiddenWidth, 1);
  const auto seq = random_sequence(length, 300, 2);
  for (auto _ : state) {
    auto s = nnb::pooled_score(scorer, seq);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_PooledScore)->ArgsProduct({{0, 1, 2}, {20, 230}});

// One mini-batch of 64 documents, forward and backward.
void BM_LossAndGrad(benchmark::State& state) {
  const auto order = static_cast<std::size_t>(state.range(0));
  const auto scorer = nnb::PooledScorer::create(order, 300, 2, nnb::kDefaultHiddenWidth, 3);
  std::vector<nnb::LabeledSequence> batch;
  for (std::size_t i = 0; i < 64; ++i) batch.push_back({random_sequence(20 + i % 40, 300, 10 + i), i % 2});
  for (auto _ : state) {
    auto r = nnb::loss_and_grad(scorer, batch);
    benchmark::DoNotOptimize(r.loss);
  }
}
BENCHMARK(BM_LossAndGrad)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_TabularPosteriors(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto spec = nnb::random_joint_spec(2, 4, 50, 5);
  const auto tables = nnb::derive_posteriors_from_joint(spec);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> pick(0, 49);
  std::vector<std::size_t> y(length);
  for (auto& s : y) s = pick(rng);
  for (auto _ : state) {
    auto a = nnb::pooledmc_posterior(tables, y);
    auto b = nnb::pooledmc2_posterior(tables, y);
    benchmark::DoNotOptimize(a.span().data());
    benchmark::DoNotOptimize(b.span().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_TabularPosteriors)->RangeMultiplier(10)->Range(10, 10000);

void BM_Softmax(benchmark::State& state) {
  nnb::Vector v(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 30.0);
  for (double& x : v) x = g(rng);
  for (auto _ : state) {
    auto p = nnb::softmax(v);
    benchmark::DoNotOptimize(p.span().data());
  }
}
BENCHMARK(BM_Softmax)->Arg(2)->Arg(4)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
