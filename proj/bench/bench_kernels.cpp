// Barrier Hessian assembly: OpenMP Gram-product kernel against the serial
// trace-product reference, plus a full LMI solve with each.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "iostab/lmi.hpp"
#include "iostab/matkit.hpp"

namespace {

struct HessianCase {
  iostab::Mat f;
  std::vector<iostab::Mat> dirs;
};

HessianCase make_case(int q, int count) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  HessianCase c;
  const iostab::Mat r = iostab::Mat::NullaryExpr(q, q, [&]() { return g(rng); });
  c.f = r * r.transpose() + q * iostab::Mat::Identity(q, q);
  for (int i = 0; i < count; ++i) {
    const iostab::Mat d = iostab::Mat::NullaryExpr(q, q, [&]() { return g(rng); });
    c.dirs.push_back(d + d.transpose());
  }
  return c;
}

void BM_HessianParallel(benchmark::State& state) {
  const auto c = make_case(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    iostab::Vec grad = iostab::Vec::Zero(static_cast<Eigen::Index>(c.dirs.size()));
    iostab::Mat hess = iostab::Mat::Zero(grad.size(), grad.size());
    iostab::logdet_derivatives_parallel(c.f, c.dirs, grad, hess);
    benchmark::DoNotOptimize(hess.data());
  }
}

void BM_HessianSerial(benchmark::State& state) {
  const auto c = make_case(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    iostab::Vec grad = iostab::Vec::Zero(static_cast<Eigen::Index>(c.dirs.size()));
    iostab::Mat hess = iostab::Mat::Zero(grad.size(), grad.size());
    iostab::logdet_derivatives_serial(c.f, c.dirs, grad, hess);
    benchmark::DoNotOptimize(hess.data());
  }
}

void solve_bench(benchmark::State& state, bool parallel) {
  const int q = static_cast<int>(state.range(0));
  const int cols = 4 * q;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const iostab::Mat phi = iostab::Mat::NullaryExpr(q, cols, [&]() { return g(rng); });
  // Delta = A Phi with A Hurwitz keeps the instance feasible.
  const iostab::Mat a = -2.0 * iostab::Mat::Identity(q, q) + 0.3 * iostab::Mat::NullaryExpr(q, q, [&]() { return g(rng); });
  const iostab::Mat delta = a * phi;
  iostab::MarginLmiOptions opts;
  opts.parallel = parallel;
  for (auto _ : state) {
    auto sol = iostab::solve_margin_lmi(delta, phi, opts);
    benchmark::DoNotOptimize(sol.t);
  }
}

void BM_SolveParallel(benchmark::State& state) { solve_bench(state, true); }
void BM_SolveSerial(benchmark::State& state) { solve_bench(state, false); }

}  // namespace

BENCHMARK(BM_HessianParallel)->Args({8, 100})->Args({16, 400})->Args({24, 900});
BENCHMARK(BM_HessianSerial)->Args({8, 100})->Args({16, 400})->Args({24, 900});
BENCHMARK(BM_SolveParallel)->Arg(4)->Arg(8);
BENCHMARK(BM_SolveSerial)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
