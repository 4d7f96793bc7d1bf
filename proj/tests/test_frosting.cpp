#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fairassign/fairness.hpp"
#include "fairassign/frosting.hpp"
#include "fairassign/gen.hpp"
#include "test_util.hpp"

using namespace fairassign;

namespace {

// Oracle integral of a piecewise-constant density over a union of
// intervals: merge every breakpoint (cell boundaries and interval
// endpoints) and evaluate each piece at its midpoint.
double quadrature(const Frosting& x, const std::vector<double>& density) {
  const int r = static_cast<int>(density.size());
  double total = 0.0;
  for (auto [a, b] : x.intervals) {
    std::vector<double> pts = {a, b};
    for (int c = 1; c < r; ++c) {
      const double p = static_cast<double>(c) / r;
      if (p > a && p < b) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    for (size_t s = 0; s + 1 < pts.size(); ++s) {
      const double mid = 0.5 * (pts[s] + pts[s + 1]);
      const int cell = std::min(r - 1, static_cast<int>(mid * r));
      total += density[cell] * (pts[s + 1] - pts[s]);
    }
  }
  return total;
}

void check_structure(const Frosting& x) {
  double prev = 0.0;
  for (auto [a, b] : x.intervals) {
    CHECK(a >= prev - 1e-12);
    CHECK(b > a);
    CHECK(b <= 1.0 + 1e-12);
    prev = b;
  }
}

}  // namespace

TEST_CASE("constant density splits at alpha") {
  FrostingProblem p;
  p.cells = 4;
  p.density = {{1.0, 1.0, 1.0, 1.0}};
  p.alpha = 0.5;
  Frosting x = perfect_frosting(p);
  check_structure(x);
  CHECK(static_cast<int>(x.intervals.size()) <= 1);
  CHECK(quadrature(x, p.density[0]) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(x.measure() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("mass concentrated in the first cell") {
  FrostingProblem p;
  p.cells = 2;
  p.density = {{2.0, 0.0}};
  p.alpha = 0.25;
  Frosting x = perfect_frosting(p);
  check_structure(x);
  CHECK(static_cast<int>(x.intervals.size()) <= 1);
  // Total mass 1; a quarter of it must come from [0, 1/2).
  CHECK(quadrature(x, p.density[0]) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("two opposed players force a genuine split") {
  FrostingProblem p;
  p.cells = 4;
  p.density = {{1.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 1.0}};
  p.alpha = 0.5;
  Frosting x = perfect_frosting(p);
  check_structure(x);
  CHECK(static_cast<int>(x.intervals.size()) <= 3);
  for (const auto& d : p.density)
    CHECK(quadrature(x, d) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("random signed densities: quadrature oracle and interval cap") {
  std::mt19937_64 rng(99);
  auto uni = [&]() { return (rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 200; ++trial) {
    FrostingProblem p;
    p.cells = 2 + static_cast<int>(rng() % 15);
    const int g = 1 + static_cast<int>(rng() % 4);
    p.alpha = 0.05 + 0.9 * uni();
    int g_eff = 0;
    for (int l = 0; l < g; ++l) {
      std::vector<double> row(p.cells, 0.0);
      bool nonzero = false;
      for (double& d : row)
        if (uni() < 0.7) {
          d = 2.0 * uni() - 1.0;  // signed, as u_even - u_odd can be
          nonzero = nonzero || d != 0.0;
        }
      g_eff += nonzero ? 1 : 0;
      p.density.push_back(std::move(row));
    }
    Frosting x = perfect_frosting(p);
    check_structure(x);
    CHECK(static_cast<int>(x.intervals.size()) <= std::max(1, 2 * g_eff - 1));
    for (const auto& d : p.density) {
      double total = 0.0;
      for (double v : d) total += v / p.cells;
      CHECK(std::abs(quadrature(x, d) - p.alpha * total) <= 1e-6);
    }
  }
}

TEST_CASE("forced contention: frosting agrees with the hard way out") {
  Instance inst;
  inst.n_students = 2;
  inst.n_schools = 2;
  inst.capacities = {1, 1};
  inst.edges = {{0, 0, 1.0, 0}, {0, 1, 0.0, 0}, {1, 0, 1.0, 0}, {1, 1, 0.0, 0}};
  inst.groups = {{0}, {1}};
  inst.validate();
  FairTarget t = maximize_fairness(inst, Objective::maxmin());
  RoundResult r = frost_pipeline(inst, t);
  CHECK(r.assignment.school_of[0] == 0);
  CHECK(r.assignment.school_of[1] == 0);
  CHECK(r.report.total_overflow == 1);
}

TEST_CASE("random instances: path-system invariants and end-to-end bounds") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 15; ++trial) {
    Instance inst = testutil::random_instance(rng, 24, 5, 3);
    FairTarget t = maximize_fairness(inst, Objective::nash());
    const SideRows side = utility_side_rows(inst, t.target);
    ResidualState st = iterate_to_fractional_core(inst, side);
    const int g = side.num_rows();

    PathSystem ps = build_path_system(inst, st);
    long long cycles = 0;
    for (const FrostComponent& c : ps.components) {
      cycles += c.cycle ? 1 : 0;
      CHECK(c.alpha > 0.0);
      CHECK(c.alpha < 1.0);
      CHECK(c.students.size() == c.even_edge.size());
      CHECK(c.students.size() == c.odd_edge.size());
      for (size_t s = 0; s < c.students.size(); ++s) {
        CHECK(inst.edges[c.even_edge[s]].student == c.students[s]);
        CHECK(inst.edges[c.odd_edge[s]].student == c.students[s]);
      }
    }
    CHECK(cycles <= g);
    ps = cycles_to_paths(inst, std::move(ps));
    for (const FrostComponent& c : ps.components) CHECK_FALSE(c.cycle);

    RoundResult r = frost_pipeline_core(inst, t, st);
    check_assignment(inst, r.assignment);
    CHECK(r.report.total_overflow <= 4LL * g * g + 3LL * g);
    for (int k = 0; k < g; ++k) CHECK(r.utilities.values[k] >= t.target.values[k] - 1e-6);
  }
}

TEST_CASE("benchmark-scale seed: Theorem 2.2 guarantees hold") {
  FairnessGenParams params;
  params.n = 200;
  params.m = 6;
  params.g = 5;
  Instance inst = gen_fairness_instance(7, params);
  FairTarget t = maximize_fairness(inst, Objective::nash());
  RoundResult r = frost_pipeline(inst, t);
  check_assignment(inst, r.assignment);
  CHECK(r.report.total_overflow <= 4LL * 5 * 5 + 3LL * 5);
  for (int k = 0; k < 5; ++k) CHECK(r.utilities.values[k] >= t.target.values[k] - 1e-6);
}
