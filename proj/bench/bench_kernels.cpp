// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <vector>

#include "expcs/channel.hpp"
#include "expcs/expander.hpp"
#include "expcs/recon.hpp"
#include "expcs/reference.hpp"
#include "expcs/rng.hpp"

namespace {

using namespace expcs;

ExpanderGraph bench_graph(std::size_t n) {
  return generate_graph({n, n * 2 / 5, 8, 0.25, 1}, 7);
}

std::vector<double> random_vector(std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(len);
  for (double& x : v) x = rng.uniform();
  return v;
}

void BM_apply_gather(benchmark::State& state) {
  const SensingMatrix phi(bench_graph(static_cast<std::size_t>(state.range(0))));
  const auto x = random_vector(phi.n(), 1);
  std::vector<double> out(phi.m());
  for (auto _ : state) {
    phi.apply(x, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_apply_reference(benchmark::State& state) {
  const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
  const auto x = random_vector(g.n(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply(g, x));
}

void BM_adjoint_gather(benchmark::State& state) {
  const SensingMatrix phi(bench_graph(static_cast<std::size_t>(state.range(0))));
  const auto r = random_vector(phi.m(), 2);
  std::vector<double> out(phi.n());
  for (auto _ : state) {
    phi.apply_adjoint(r, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_adjoint_reference(benchmark::State& state) {
  const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
  const auto r = random_vector(g.m(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply_adjoint(g, r));
}

void BM_verify_exact_parallel(benchmark::State& state) {
  const auto g = generate_graph({24, 16, 4, 0.25, 3}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_expansion(g, 3, 0.49, VerifyMode::exact, 1'000'000, 0));
  }
}

void BM_verify_exact_reference(benchmark::State& state) {
  const auto g = generate_graph({24, 16, 4, 0.25, 3}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::verify_expansion_exact(g, 3, 0.49, 1'000'000));
  }
}

void BM_kraft_exhaustive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kraft_sum_support_code_exhaustive(n, 2));
}

void BM_kraft_closed_form(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference::kraft_sum_support_code(n, 2));
}

}  // namespace

BENCHMARK(BM_apply_gather)->Arg(2000)->Arg(100000);
BENCHMARK(BM_apply_reference)->Arg(2000)->Arg(100000);
BENCHMARK(BM_adjoint_gather)->Arg(2000)->Arg(100000);
BENCHMARK(BM_adjoint_reference)->Arg(2000)->Arg(100000);
BENCHMARK(BM_verify_exact_parallel);
BENCHMARK(BM_verify_exact_reference);
BENCHMARK(BM_kraft_exhaustive)->Arg(6)->Arg(8);
BENCHMARK(BM_kraft_closed_form)->Arg(6)->Arg(8);

BENCHMARK_MAIN();
