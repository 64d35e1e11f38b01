#include <benchmark/benchmark.h>

#include <cmath>

#include "sundman/verify.hpp"

using namespace sundman;

namespace {

QuadraticSode make_sode(const std::string& g, const std::string& A,
                        const std::string& b, Interval dom) {
  return QuadraticSode::from_scalar(
      ScalarFunction::parse(g, "x", dom),
      ScalarFunction::parse(A, "x", dom),
      ScalarFunction::parse(b, "x", dom), dom);
}

void BM_quadrature(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        quad([](double x) { return std::sin(3 * x) / (1 + x * x); }, 0.0, 5.0,
             1e-12));
}
BENCHMARK(BM_quadrature);

void BM_solve_ivp(benchmark::State& state) {
  const OdeField osc = [](double, const State& y, State& dy) {
    dy = {y[1], -y[0] - 0.1 * y[1]};
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_ivp(osc, 0.0, {1.0, 0.0}, 20.0, 1e-10));
}
BENCHMARK(BM_solve_ivp);

void BM_q_invariant(benchmark::State& state) {
  const QuadraticSode s = make_sode("1/x", "x", "2*x^3 - 1", {0.5, 2.0});
  for (auto _ : state) {
    const RealFn q = q_invariant(s);
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) acc += q(0.5 + 1.5 * (i + 0.5) / 64);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_q_invariant);

void BM_linearize(benchmark::State& state) {
  const QuadraticSode s = make_sode("1/x", "x", "1/2", {0.5, 3.0});
  for (auto _ : state) benchmark::DoNotOptimize(linearize(s));
}
BENCHMARK(BM_linearize);

}  // namespace

BENCHMARK_MAIN();
