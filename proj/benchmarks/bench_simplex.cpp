#include <benchmark/benchmark.h>

#include <random>

#include "fairassign/simplex.hpp"

namespace {

// Dense transportation-style LP: n suppliers x m sinks with box bounds.
fairassign::LpProblem make_lp(int n, int m, unsigned seed) {
  std::mt19937_64 rng(seed);
  fairassign::LpProblem p;
  for (int i = 0; i < n * m; ++i)
    p.add_variable(0.0, 1.0, static_cast<double>(rng() % 100) / 10.0);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < m; ++j) coeffs.push_back({i * m + j, 1.0});
    p.add_row(fairassign::Relation::Equal, 1.0, std::move(coeffs));
  }
  for (int j = 0; j < m; ++j) {
    std::vector<std::pair<int, double>> coeffs;
    for (int i = 0; i < n; ++i) coeffs.push_back({i * m + j, 1.0});
    p.add_row(fairassign::Relation::LessEqual, (n + m - 1) / m, std::move(coeffs));
  }
  return p;
}

void BM_SimplexCold(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  fairassign::LpProblem p = make_lp(n, 10, 42);
  for (auto _ : state) {
    auto res = fairassign::solve_vertex(p);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_SimplexCold)->Arg(50)->Arg(100)->Arg(200);

void BM_SimplexWarmObjectiveSwap(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  fairassign::LpProblem p = make_lp(n, 10, 42);
  fairassign::SimplexSolver solver;
  solver.load(p);
  solver.solve();
  std::mt19937_64 rng(7);
  std::vector<double> obj(p.objective);
  for (auto _ : state) {
    for (double& o : obj) o = static_cast<double>(rng() % 100) / 10.0;
    solver.set_objective(obj, fairassign::Sense::Maximize);
    benchmark::DoNotOptimize(solver.solve());
  }
}
BENCHMARK(BM_SimplexWarmObjectiveSwap)->Arg(50)->Arg(100)->Arg(200);

}  // namespace
