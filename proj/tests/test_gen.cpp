#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairassign/gen.hpp"
#include "fairassign/matching.hpp"
#include "fairassign/side_rows.hpp"

using namespace fairassign;

TEST_CASE("generator determinism: same seed, byte-identical JSON") {
  FairnessGenParams params;
  params.n = 100;
  params.m = 5;
  params.g = 3;
  CHECK(write_instance(gen_fairness_instance(7, params)) ==
        write_instance(gen_fairness_instance(7, params)));
  CHECK(write_instance(gen_fairness_instance(7, params)) !=
        write_instance(gen_fairness_instance(8, params)));

  RankGenResult a = gen_rank_instance(5, 60, 6, 4);
  RankGenResult b = gen_rank_instance(5, 60, 6, 4);
  CHECK(write_instance(a.instance) == write_instance(b.instance));
  CHECK(a.rho.counts == b.rho.counts);
}

TEST_CASE("edge counts follow the binomial mean") {
  FairnessGenParams params;
  params.n = 200;
  params.m = 10;
  params.g = 2;
  long long total = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Instance inst = gen_fairness_instance(seed, params);
    total += inst.num_edges();
    for (int i = 0; i < inst.n_students; ++i) CHECK(!inst.student_edges()[i].empty());
    for (const auto& grp : inst.groups) CHECK(grp.size() <= static_cast<size_t>(params.n));
  }
  const double expected = 20.0 * params.n * params.m * (3.0 / params.m);
  CHECK(std::abs(total - expected) <= 0.05 * expected);
}

TEST_CASE("calibrate_capacities: star graph forces full capacity") {
  Instance star;
  star.n_students = 5;
  star.n_schools = 2;
  star.capacities = {0, 0};
  for (int i = 0; i < 5; ++i) star.edges.push_back({i, 0, 1.0, 0});
  star.validate();
  std::vector<long long> caps = calibrate_capacities(star);
  CHECK(caps[0] == 5);
  CHECK(caps[1] == 0);
}

TEST_CASE("calibrated instances are fractionally feasible with minimal total") {
  FairnessGenParams params;
  params.n = 120;
  params.m = 6;
  params.g = 2;
  for (int seed = 0; seed < 10; ++seed) {
    Instance inst = gen_fairness_instance(seed, params);
    const long long total =
        std::accumulate(inst.capacities.begin(), inst.capacities.end(), 0LL);
    CHECK(total >= inst.n_students);
    CHECK(solve_vertex(build_assignment_lp(inst, SideRows{})).status == SolveStatus::Optimal);
  }
}

TEST_CASE("rank generator: nested matchings and signature budget") {
  for (int seed = 0; seed < 10; ++seed) {
    RankGenResult r = gen_rank_instance(seed, 80, 8, 5);
    const Instance& inst = r.instance;
    CHECK(inst.has_ranks);
    // Ranks form a permutation 1..deg per student; utility = 1/rank.
    for (int i = 0; i < inst.n_students; ++i) {
      std::vector<int> ranks;
      for (int e : inst.student_edges()[i]) {
        ranks.push_back(inst.edges[e].rank);
        CHECK(inst.edges[e].utility == doctest::Approx(1.0 / inst.edges[e].rank));
      }
      std::sort(ranks.begin(), ranks.end());
      for (size_t pos = 0; pos < ranks.size(); ++pos)
        CHECK(ranks[pos] == static_cast<int>(pos) + 1);
    }
    for (size_t t = 1; t < r.matching_sizes.size(); ++t)
      CHECK(r.matching_sizes[t - 1] <= r.matching_sizes[t]);
    long long prefix = 0;
    for (size_t t = 0; t < r.rho.counts.size(); ++t) {
      CHECK(r.rho.counts[t] >= 0);
      prefix += r.rho.counts[t];
      CHECK(prefix <= r.matching_sizes[t]);
    }
    // First entry is anchored below by 0.9x the capacity-respecting
    // matching and above by the raw-graph matching.
    CHECK(r.rho.counts[0] >=
          static_cast<long long>(std::ceil(0.9 * max_matching_size(inst, 1))));
    // Raw-graph sizes dominate the capacity-respecting ones.
    Instance uncap = inst;
    uncap.capacities.assign(inst.n_schools, inst.n_students);
    uncap.validate();
    for (size_t t = 0; t < r.matching_sizes.size(); ++t) {
      CHECK(r.matching_sizes[t] == max_matching_size(uncap, static_cast<int>(t) + 1));
      CHECK(r.matching_sizes[t] >= max_matching_size(inst, static_cast<int>(t) + 1));
    }
  }
}

TEST_CASE("max_matching_size agrees with an exhaustive oracle") {
  // 4 students, 2 schools, capacities (1,2); brute force over all
  // school choices (including unassigned) of the 4 students.
  Instance inst;
  inst.n_students = 4;
  inst.n_schools = 2;
  inst.capacities = {1, 2};
  inst.edges = {{0, 0, 1.0, 1}, {1, 0, 1.0, 1}, {1, 1, 1.0, 2}, {2, 1, 1.0, 1}, {3, 0, 1.0, 1}};
  inst.has_ranks = true;
  inst.validate();
  auto brute = [&](int max_rank) {
    long long best = 0;
    // Each student: -1 (unmatched) or one of its edges with rank ok.
    std::vector<std::vector<int>> choices(4, {-1});
    for (int e = 0; e < inst.num_edges(); ++e)
      if (inst.edges[e].rank <= max_rank) choices[inst.edges[e].student].push_back(e);
    std::vector<int> pick(4, 0);
    while (true) {
      std::vector<long long> load(2, 0);
      long long size = 0;
      bool ok = true;
      for (int i = 0; i < 4; ++i) {
        const int e = choices[i][pick[i]];
        if (e < 0) continue;
        if (++load[inst.edges[e].school] > inst.capacities[inst.edges[e].school]) ok = false;
        ++size;
      }
      if (ok) best = std::max(best, size);
      int i = 0;
      while (i < 4 && pick[i] + 1 == static_cast<int>(choices[i].size())) pick[i++] = 0;
      if (i == 4) break;
      ++pick[i];
    }
    return best;
  };
  CHECK(max_matching_size(inst, 1) == brute(1));
  CHECK(max_matching_size(inst, 2) == brute(2));
  CHECK(max_matching_size(inst, 0) == brute(99));
}
