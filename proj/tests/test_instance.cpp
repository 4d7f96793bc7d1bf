#include <doctest.h>

#include <random>

#include "fairassign/instance.hpp"

using namespace fairassign;

namespace {

Instance small_instance() {
  Instance inst;
  inst.n_students = 3;
  inst.n_schools = 2;
  inst.capacities = {2, 2};
  inst.edges = {{0, 0, 1.5, 0}, {0, 1, 0.5, 0}, {1, 0, 2.0, 0}, {2, 1, 3.0, 0}};
  inst.groups = {{0, 1}, {2}, {0, 2}};
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("group utilities: single edge counted in every containing group") {
  Instance inst;
  inst.n_students = 1;
  inst.n_schools = 1;
  inst.capacities = {1};
  inst.edges = {{0, 0, 5.0, 0}};
  inst.groups = {{0}, {0}};
  inst.validate();
  FractionalAssignment a{{1.0}, false};
  GroupUtilities u = group_utilities(inst, a);
  REQUIRE(u.values.size() == 2);
  CHECK(u.values[0] == doctest::Approx(5.0));
  CHECK(u.values[1] == doctest::Approx(5.0));
}

TEST_CASE("group utilities: zero utilities give the zero vector") {
  Instance inst = small_instance();
  for (Edge& e : inst.edges) e.utility = 0.0;
  inst.validate();
  IntegralAssignment a{{0, 0, 1}};
  for (double v : group_utilities(inst, a).values) CHECK(v == 0.0);
}

TEST_CASE("group utilities: match direct summation over edges") {
  Instance inst = small_instance();
  FractionalAssignment a{{0.25, 0.75, 1.0, 1.0}, false};
  GroupUtilities u = group_utilities(inst, a);
  // Sum u_e * y_e over edges of each group's members, by hand.
  const double u0 = 1.5 * 0.25 + 0.5 * 0.75 + 2.0;  // students 0,1
  const double u1 = 3.0;                             // student 2
  const double u2 = 1.5 * 0.25 + 0.5 * 0.75 + 3.0;   // students 0,2
  CHECK(u.values[0] == doctest::Approx(u0));
  CHECK(u.values[1] == doctest::Approx(u1));
  CHECK(u.values[2] == doctest::Approx(u2));

  IntegralAssignment ia{{0, 0, 1}};
  GroupUtilities ui = group_utilities(inst, ia);
  CHECK(ui.values[0] == doctest::Approx(1.5 + 2.0));
  CHECK(ui.values[1] == doctest::Approx(3.0));
  CHECK(ui.values[2] == doctest::Approx(1.5 + 3.0));
}

TEST_CASE("violation report: loads equal to capacities give zero overflow") {
  Instance inst = small_instance();
  IntegralAssignment a{{0, 0, 1}};
  ViolationReport rep = violation_report(inst, a);
  CHECK(rep.total_overflow == 0);
  CHECK(rep.total_overflow_beyond_one == 0);
}

TEST_CASE("violation report: load 4 against capacity 2") {
  Instance inst;
  inst.n_students = 4;
  inst.n_schools = 1;
  inst.capacities = {2};
  for (int i = 0; i < 4; ++i) inst.edges.push_back({i, 0, 1.0, 0});
  inst.validate();
  IntegralAssignment a{{0, 0, 0, 0}};
  ViolationReport rep = violation_report(inst, a);
  CHECK(rep.overflow[0] == 2);
  CHECK(rep.overflow_beyond_one[0] == 1);
  CHECK(rep.total_overflow == 2);
  CHECK(rep.total_overflow_beyond_one == 1);
}

TEST_CASE("violation report: equals a recount from school_of") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12, m = 4;
    Instance inst;
    inst.n_students = n;
    inst.n_schools = m;
    for (int j = 0; j < m; ++j)
      inst.capacities.push_back(static_cast<long long>(rng() % 4));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        inst.edges.push_back({i, j, static_cast<double>(rng() % 10), 0});
    inst.validate();
    IntegralAssignment a;
    for (int i = 0; i < n; ++i) a.school_of.push_back(static_cast<int>(rng() % m));
    ViolationReport rep = violation_report(inst, a);
    std::vector<long long> loads(m, 0);
    for (int j : a.school_of) ++loads[j];
    long long total = 0, beyond = 0;
    for (int j = 0; j < m; ++j) {
      total += std::max<long long>(0, loads[j] - inst.capacities[j]);
      beyond += std::max<long long>(0, loads[j] - inst.capacities[j] - 1);
    }
    CHECK(rep.total_overflow == total);
    CHECK(rep.total_overflow_beyond_one == beyond);
  }
}

TEST_CASE("json: write then read is the identity") {
  Instance inst = small_instance();
  Instance back = read_instance(write_instance(inst));
  CHECK(back.n_students == inst.n_students);
  CHECK(back.n_schools == inst.n_schools);
  CHECK(back.capacities == inst.capacities);
  REQUIRE(back.edges.size() == inst.edges.size());
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    CHECK(back.edges[e].student == inst.edges[e].student);
    CHECK(back.edges[e].school == inst.edges[e].school);
    CHECK(back.edges[e].utility == inst.edges[e].utility);
  }
  CHECK(back.groups == inst.groups);

  IntegralAssignment a{{0, 0, 1}};
  IntegralAssignment aback = read_assignment(write_assignment(a), inst);
  CHECK(aback.school_of == a.school_of);
}

TEST_CASE("json: ranked instances round-trip") {
  Instance inst = small_instance();
  inst.has_ranks = true;
  int r = 1;
  for (Edge& e : inst.edges) e.rank = r++;
  inst.validate();
  Instance back = read_instance(write_instance(inst));
  CHECK(back.has_ranks);
  for (size_t e = 0; e < inst.edges.size(); ++e) CHECK(back.edges[e].rank == inst.edges[e].rank);
}

TEST_CASE("validation: duplicate edge rejected") {
  Instance inst = small_instance();
  std::string bytes = write_instance(inst);
  inst.edges.push_back({0, 0, 1.0, 0});
  CHECK_THROWS_AS(inst.validate(), ValidationError);
}

TEST_CASE("validation: negative capacity rejected") {
  Instance inst = small_instance();
  inst.capacities[1] = -1;
  CHECK_THROWS_AS(inst.validate(), ValidationError);
  CHECK_THROWS_AS(
      read_instance(R"({"n_students":1,"n_schools":1,"capacities":[-2],)"
                    R"("edges":[{"s":0,"t":0,"u":1.0}],"groups":[]})"),
      ValidationError);
}

TEST_CASE("validation: malformed documents rejected with field names") {
  CHECK_THROWS_AS(read_instance("not json"), ValidationError);
  CHECK_THROWS_AS(read_instance("{}"), ValidationError);
  CHECK_THROWS_AS(
      read_instance(R"({"n_students":1,"n_schools":1,"capacities":[1],)"
                    R"("edges":[{"s":0,"t":0,"u":1.0}],"groups":[],"extra":1})"),
      ValidationError);
  // Student with no incident edge.
  CHECK_THROWS_AS(
      read_instance(R"({"n_students":2,"n_schools":1,"capacities":[1],)"
                    R"("edges":[{"s":0,"t":0,"u":1.0}],"groups":[]})"),
      ValidationError);
  // Rank on only some edges.
  CHECK_THROWS_AS(
      read_instance(R"({"n_students":1,"n_schools":2,"capacities":[1,1],)"
                    R"("edges":[{"s":0,"t":0,"u":1.0,"rank":1},{"s":0,"t":1,"u":0.5}],)"
                    R"("groups":[]})"),
      ValidationError);
}

TEST_CASE("check_feasible enforces row sums and capacities") {
  Instance inst = small_instance();
  FractionalAssignment good{{0.5, 0.5, 1.0, 1.0}, false};
  CHECK_NOTHROW(check_feasible(inst, good));
  FractionalAssignment bad_sum{{0.5, 0.4, 1.0, 1.0}, false};
  CHECK_THROWS_AS(check_feasible(inst, bad_sum), ValidationError);

  Instance tight = small_instance();
  tight.capacities = {1, 2};
  tight.validate();
  FractionalAssignment over{{1.0, 0.0, 1.0, 1.0}, false};
  CHECK_THROWS_AS(check_feasible(tight, over), ValidationError);
  over.relaxed = true;
  CHECK_NOTHROW(check_feasible(tight, over));
}
