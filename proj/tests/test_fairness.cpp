#include <doctest.h>

#include <cmath>
#include <random>

#include "fairassign/fairness.hpp"
#include "test_util.hpp"

using namespace fairassign;

namespace {

Instance identity_two_by_two() {
  Instance inst;
  inst.n_students = 2;
  inst.n_schools = 2;
  inst.capacities = {1, 1};
  inst.edges = {{0, 0, 1.0, 0}, {0, 1, 0.0, 0}, {1, 0, 0.0, 0}, {1, 1, 1.0, 0}};
  inst.groups = {{0}, {1}};
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("MaxMin on the 2x2 identity instance achieves min-utility 1") {
  Instance inst = identity_two_by_two();
  FairTarget t = maximize_fairness(inst, Objective::maxmin());
  CHECK(t.objective_value == doctest::Approx(1.0));
  CHECK(t.target.values[0] == doctest::Approx(1.0));
  CHECK(t.target.values[1] == doctest::Approx(1.0));
  check_feasible(inst, t.witness);
}

TEST_CASE("NashWelfare on a symmetric instance equalizes group utilities") {
  // Two interchangeable students sharing one school of capacity 2.
  Instance inst;
  inst.n_students = 2;
  inst.n_schools = 1;
  inst.capacities = {2};
  inst.edges = {{0, 0, 1.0, 0}, {1, 0, 1.0, 0}};
  inst.groups = {{0}, {1}};
  inst.validate();
  FairTarget t = maximize_fairness(inst, Objective::nash());
  CHECK(t.target.values[0] == doctest::Approx(t.target.values[1]).epsilon(1e-5));

  Instance sym = identity_two_by_two();
  // Make the rows identical so the two groups are interchangeable.
  sym.edges = {{0, 0, 1.0, 0}, {0, 1, 1.0, 0}, {1, 0, 1.0, 0}, {1, 1, 1.0, 0}};
  sym.validate();
  FairTarget t2 = maximize_fairness(sym, Objective::nash());
  CHECK(t2.target.values[0] == doctest::Approx(t2.target.values[1]).epsilon(1e-5));
}

TEST_CASE("NashWelfare matches a grid-search oracle on 3 students / 2 schools") {
  Instance inst;
  inst.n_students = 3;
  inst.n_schools = 2;
  inst.capacities = {2, 2};
  inst.edges = {{0, 0, 1.0, 0}, {0, 1, 0.3, 0}, {1, 0, 0.4, 0},
                {1, 1, 0.8, 0}, {2, 0, 0.6, 0}, {2, 1, 0.5, 0}};
  inst.groups = {{0, 1}, {2}};
  inst.validate();
  FairTarget t = maximize_fairness(inst, Objective::nash());

  // y_i = fraction of student i on school 0; capacities force the total
  // onto [1,2].  Coarse grid, then two local refinements.
  auto objective = [&](double y0, double y1, double y2) {
    const double load0 = y0 + y1 + y2;
    if (load0 > 2.0 + 1e-12 || 3.0 - load0 > 2.0 + 1e-12) return -1e30;
    const double u0 = 1.0 * y0 + 0.3 * (1 - y0) + 0.4 * y1 + 0.8 * (1 - y1);
    const double u1 = 0.6 * y2 + 0.5 * (1 - y2);
    return std::log(u0) + std::log(u1);
  };
  double best = -1e30, by0 = 0, by1 = 0, by2 = 0, step = 0.01;
  for (double y0 = 0; y0 <= 1; y0 += step)
    for (double y1 = 0; y1 <= 1; y1 += step)
      for (double y2 = 0; y2 <= 1; y2 += step) {
        const double v = objective(y0, y1, y2);
        if (v > best) best = v, by0 = y0, by1 = y1, by2 = y2;
      }
  for (int refine = 0; refine < 3; ++refine) {
    const double window = 2 * step;
    const double lo0 = std::max(0.0, by0 - window), hi0 = std::min(1.0, by0 + window);
    const double lo1 = std::max(0.0, by1 - window), hi1 = std::min(1.0, by1 + window);
    const double lo2 = std::max(0.0, by2 - window), hi2 = std::min(1.0, by2 + window);
    step /= 10;
    for (double y0 = lo0; y0 <= hi0; y0 += step)
      for (double y1 = lo1; y1 <= hi1; y1 += step)
        for (double y2 = lo2; y2 <= hi2; y2 += step) {
          const double v = objective(y0, y1, y2);
          if (v > best) best = v, by0 = y0, by1 = y1, by2 = y2;
        }
  }
  CHECK(t.objective_value == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("proportionality: single group at the welfare optimum has ratio 1") {
  Instance inst = identity_two_by_two();
  inst.groups = {{0, 1}};
  inst.validate();
  FairTarget t = maximize_fairness(inst, Objective::nash());
  std::vector<double> ratios = proportionality_check(inst, t.target);
  REQUIRE(ratios.size() == 1);
  CHECK(ratios[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("proportionality: symmetric two-group split gives ratios 1/2") {
  // One valuable seat plus a worthless dummy school: either group alone
  // gets W = 1, Nash splits the seat for W/2 each.
  Instance inst;
  inst.n_students = 2;
  inst.n_schools = 2;
  inst.capacities = {1, 1};
  inst.edges = {{0, 0, 1.0, 0}, {0, 1, 1e-6, 0}, {1, 0, 1.0, 0}, {1, 1, 1e-6, 0}};
  inst.groups = {{0}, {1}};
  inst.validate();
  FairTarget t = maximize_fairness(inst, Objective::nash());
  std::vector<double> ratios = proportionality_check(inst, t.target);
  // The objective is flat near the optimum, so the split itself is only
  // pinned to ~1e-3 even at eps = 1e-6 on the objective.
  CHECK(ratios[0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(ratios[1] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("proportionality: Nash ratios are at least 1/g on random instances") {
  std::mt19937_64 rng(314);
  for (int trial = 0; trial < 15; ++trial) {
    Instance inst = testutil::random_instance(rng, 8, 3, 3);
    FairTarget t = maximize_fairness(inst, Objective::nash());
    for (double ratio : proportionality_check(inst, t.target))
      CHECK(ratio >= 1.0 / 3.0 - 1e-6);
  }
}

TEST_CASE("CES with r=1 agrees with LinearWelfare") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst = testutil::random_instance(rng, 6, 3, 2);
    FairTarget ces = maximize_fairness(inst, Objective::ces(1.0));
    FairTarget wel = maximize_fairness(inst, Objective::welfare());
    CHECK(ces.objective_value ==
          doctest::Approx(wel.objective_value).epsilon(1e-5));
  }
}

TEST_CASE("LinearWelfare homogeneity for a single group") {
  std::mt19937_64 rng(123);
  Instance inst = testutil::random_instance(rng, 6, 3, 1);
  FairTarget base = maximize_fairness(inst, Objective::welfare());
  Instance scaled = inst;
  for (Edge& e : scaled.edges) e.utility *= 3.5;
  scaled.validate();
  FairTarget t = maximize_fairness(scaled, Objective::welfare());
  CHECK(t.target.values[0] == doctest::Approx(3.5 * base.target.values[0]).epsilon(1e-9));
}

TEST_CASE("objective validation") {
  Instance inst = identity_two_by_two();
  CHECK_THROWS_AS(maximize_fairness(inst, Objective::ces(0.0)), ValidationError);
  CHECK_THROWS_AS(maximize_fairness(inst, Objective::ces(1.5)), ValidationError);
  CHECK_THROWS_AS(maximize_fairness(inst, Objective::welfare({1.0})), ValidationError);

  // A group that cannot achieve positive utility is rejected for Nash.
  Instance zero = inst;
  zero.edges[2].utility = 0.0;
  zero.edges[3].utility = 0.0;
  zero.validate();
  CHECK_THROWS_AS(maximize_fairness(zero, Objective::nash()), ValidationError);
}

TEST_CASE("build_lp1 shape and feasibility") {
  Instance inst = identity_two_by_two();
  FairTarget t = maximize_fairness(inst, Objective::maxmin());
  LpProblem lp1 = build_lp1(inst, t.target);
  CHECK(lp1.num_vars == inst.num_edges());
  CHECK(lp1.rows.size() ==
        static_cast<size_t>(inst.n_students + inst.n_schools + inst.num_groups()));
  SolveResult res = solve_vertex(lp1);
  REQUIRE(res.status == SolveStatus::Optimal);

  // g = 0: plain transportation feasibility LP.
  Instance nog = inst;
  nog.groups.clear();
  nog.validate();
  LpProblem lp0 = build_lp1(nog, GroupUtilities{});
  CHECK(lp0.rows.size() == static_cast<size_t>(inst.n_students + inst.n_schools));
  CHECK(solve_vertex(lp0).status == SolveStatus::Optimal);
}

TEST_CASE("empty polytope raises InfeasibleError") {
  Instance inst;
  inst.n_students = 2;
  inst.n_schools = 1;
  inst.capacities = {1};
  inst.edges = {{0, 0, 1.0, 0}, {1, 0, 1.0, 0}};
  inst.groups = {{0, 1}};
  inst.validate();
  CHECK_THROWS_AS(maximize_fairness(inst, Objective::nash()), InfeasibleError);
}
