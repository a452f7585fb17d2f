#include <benchmark/benchmark.h>

#include "emfend/fusion/co_attention.hpp"
#include "emfend/model/em_fend.hpp"
#include "emfend/numerics/kernels.hpp"
#include "emfend/numerics/ops.hpp"
#include "emfend/synthetic/generator.hpp"

namespace {

using namespace emfend;
using numerics::Rng;
using numerics::Shape;
using numerics::Tensor;
using numerics::Var;

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(Shape{rows, cols});
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

fusion::MCTConfig mct_config(std::size_t d) {
  fusion::MCTConfig c;
  c.width = d;
  c.heads = 8;
  c.ffn_dim = 2 * d;
  return c;
}

// Text stream of 256 tokens against 49 image regions.
void BM_CoAttentionForward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  numerics::ParameterStore store;
  Rng rng(2);
  const fusion::MCTLayer layer(store, "mct", mct_config(d), rng);
  const Var a = Var::constant(random_matrix(256, d, rng));
  const Var b = Var::constant(random_matrix(49, d, rng));
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(a, {}, b, {}).stream_a.value());
}
BENCHMARK(BM_CoAttentionForward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CoAttentionBackward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  numerics::ParameterStore store;
  Rng rng(3);
  const fusion::MCTLayer layer(store, "mct", mct_config(d), rng);
  const Var a = Var::constant(random_matrix(256, d, rng));
  const Var b = Var::constant(random_matrix(49, d, rng));
  for (auto _ : state) {
    const fusion::MCTOutput out = layer.forward(a, {}, b, {});
    const Var loss = numerics::ops::add(numerics::ops::sum(out.stream_a), numerics::ops::sum(out.stream_b));
    store.zero_grad();
    numerics::backward(loss, store);
  }
}
BENCHMARK(BM_CoAttentionBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  model::ModelConfig config;
  config.d = static_cast<std::size_t>(state.range(0));
  config.encoder_layers = 1;
  synthetic::Options options;
  options.kind = synthetic::Kind::entity_mismatch;
  options.n = 8;
  options.visual_width = config.d_visual;
  const auto posts = synthetic::generate(options);
  const model::EmFend m(config);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(posts[i++ % posts.size()]));
}
BENCHMARK(BM_ModelForward)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
