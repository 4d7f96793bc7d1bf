#include "fairassign/gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fairassign/matching.hpp"
#include "fairassign/simplex.hpp"

namespace fairassign {

namespace {

// Portable draws: fixed bit-to-double mapping and modulo reduction, so
// the same seed reproduces the same instance on every platform.
double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

long long rand_int(std::mt19937_64& rng, long long lo, long long hi) {
  return lo + static_cast<long long>(rng() % static_cast<unsigned long long>(hi - lo + 1));
}

/// Shared §5 graph process: presence draws per (student, school) in
/// lexicographic order, isolated students patched with one uniform
/// school.  Returns the neighborhood (ascending school ids) per student.
std::vector<std::vector<int>> draw_graph(std::mt19937_64& rng, int n, int m, double p) {
  std::vector<std::vector<int>> nbr(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j)
      if (u01(rng) < p) nbr[i].push_back(j);
    if (nbr[i].empty()) nbr[i].push_back(static_cast<int>(rand_int(rng, 0, m - 1)));
  }
  return nbr;
}

}  // namespace

std::vector<long long> calibrate_capacities(const Instance& graph) {
  // Minimal *common* capacity C such that every student is assignable
  // with C_j = C at every school that has at least one edge.  Schools
  // with no incident edges can never receive load and keep capacity 0.
  // Minimizing the shared C (rather than independent C_j) keeps the
  // capacities balanced across schools instead of mirroring the load
  // profile of one particular feasible flow.  By max-flow integrality
  // the minimal integer C equals the ceiling of the LP optimum, so we
  // binary-search C over integer flow checks.
  const int n = graph.n_students, m = graph.n_schools;
  auto feasible = [&](long long c) {
    MaxFlowNetwork net(2 + n + m);
    const int src = 0, snk = 1;
    for (int i = 0; i < n; ++i) net.add_edge(src, 2 + i, 1);
    for (const Edge& e : graph.edges) net.add_edge(2 + e.student, 2 + n + e.school, 1);
    for (int j = 0; j < m; ++j)
      if (!graph.school_edges()[j].empty()) net.add_edge(2 + n + j, snk, c);
    return net.max_flow(src, snk) == n;
  };
  long long lo = n == 0 ? 0 : (n + m - 1) / std::max(m, 1), hi = n;
  if (!feasible(hi))
    throw std::logic_error("calibrate_capacities: graph admits no full assignment");
  while (lo < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (feasible(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  std::vector<long long> caps(m, 0);
  for (int j = 0; j < m; ++j)
    if (!graph.school_edges()[j].empty()) caps[j] = lo;
  return caps;
}

Instance gen_fairness_instance(std::uint64_t seed, const FairnessGenParams& params) {
  const int n = params.n, m = params.m, g = params.g;
  const double p = params.p < 0.0 ? 3.0 / m : params.p;
  std::mt19937_64 rng(seed);

  std::vector<double> alpha(m);
  for (int j = 0; j < m; ++j) alpha[j] = u01(rng);
  const std::vector<std::vector<int>> nbr = draw_graph(rng, n, m, p);

  Instance inst;
  inst.n_students = n;
  inst.n_schools = m;
  inst.capacities.assign(m, 0);
  for (int i = 0; i < n; ++i)
    for (int j : nbr[i]) inst.edges.push_back({i, j, u01(rng) * alpha[j], 0});

  for (int k = 0; k < g; ++k) {
    // Redraw until the group is nonempty: an empty group has no
    // well-defined fairness share and would make log-welfare singular.
    std::vector<int> members;
    while (members.empty()) {
      const double beta = u01(rng);
      for (int i = 0; i < n; ++i)
        if (u01(rng) < beta) members.push_back(i);
    }
    inst.groups.push_back(std::move(members));
  }

  inst.validate();
  inst.capacities = calibrate_capacities(inst);
  inst.validate();
  return inst;
}

RankGenResult gen_rank_instance(std::uint64_t seed, int n, int m, int max_rank) {
  std::mt19937_64 rng(seed);
  const double p = 3.0 / m;
  std::vector<double> alpha(m);
  for (int j = 0; j < m; ++j) alpha[j] = u01(rng);  // drawn for process parity, unused
  const std::vector<std::vector<int>> nbr = draw_graph(rng, n, m, p);

  RankGenResult out;
  Instance& inst = out.instance;
  inst.n_students = n;
  inst.n_schools = m;
  inst.capacities.assign(m, 0);
  inst.has_ranks = true;
  for (int i = 0; i < n; ++i) {
    // Random preference permutation of the neighborhood (Fisher-Yates).
    std::vector<int> perm(nbr[i]);
    for (int a = static_cast<int>(perm.size()) - 1; a > 0; --a)
      std::swap(perm[a], perm[rand_int(rng, 0, a)]);
    std::vector<int> rank_of(m, 0);
    for (size_t pos = 0; pos < perm.size(); ++pos) rank_of[perm[pos]] = static_cast<int>(pos) + 1;
    for (int j : nbr[i])
      inst.edges.push_back({i, j, 1.0 / rank_of[j], rank_of[j]});
  }
  inst.validate();
  inst.capacities = calibrate_capacities(inst);
  inst.validate();

  // M_t is measured on the raw graph, before capacities constrain it:
  // with the calibrated (exactly tight) capacities every prefix demand
  // up to the capacitated matching size is always satisfiable, so only
  // the raw-graph sizes make the target signature occasionally
  // unattainable, which is the point of the protocol.  The first entry
  // is drawn between 0.9x the capacitated matching (a always-reachable
  // floor) and the raw-graph matching (an often-unreachable ceiling),
  // putting the target on either side of feasibility with the intended
  // odds.
  Instance uncap = inst;
  uncap.capacities.assign(m, n);
  uncap.validate();
  out.matching_sizes.resize(max_rank);
  for (int t = 1; t <= max_rank; ++t) out.matching_sizes[t - 1] = max_matching_size(uncap, t);

  out.rho.counts.assign(max_rank, 0);
  const long long m1_cap = max_matching_size(inst, 1);
  out.rho.counts[0] = rand_int(rng, static_cast<long long>(std::ceil(0.9 * m1_cap)),
                               out.matching_sizes[0]);
  long long prefix = out.rho.counts[0];
  for (int t = 2; t <= max_rank; ++t) {
    const long long room = std::max<long long>(0, out.matching_sizes[t - 1] - prefix);
    out.rho.counts[t - 1] = rand_int(rng, 0, room);
    prefix += out.rho.counts[t - 1];
  }
  return out;
}

}  // namespace fairassign
