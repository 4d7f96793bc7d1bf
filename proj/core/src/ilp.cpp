#include "fairassign/ilp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "fairassign/matching.hpp"
#include "fairassign/side_rows.hpp"
#include "fairassign/simplex.hpp"

namespace fairassign {

namespace {

/// One branch decision; the full fixing set of a node is the chain up
/// to the root.
struct Node {
  int parent = -1;
  int fix_edge = -1;
  signed char fix_val = 0;
  double bound = 0.0;  // parent's LP bound until the node is solved
};

long long recount(const Instance& inst, const IntegralAssignment& a) {
  const std::vector<long long> loads = a.loads(inst);
  long long total = 0;
  for (int j = 0; j < inst.n_schools; ++j) total += std::max(0LL, loads[j] - inst.capacities[j]);
  return total;
}

bool meets_targets(const Instance& inst, const IntegralAssignment& a,
                   const GroupUtilities& target) {
  const GroupUtilities u = group_utilities(inst, a);
  for (size_t k = 0; k < target.values.size(); ++k)
    if (u.values[k] < target.values[k] - 1e-6) return false;
  return true;
}

}  // namespace

IlpResult ilp_min_violation(const Instance& inst, const GroupUtilities& target,
                            const IlpOptions& opts, const IntegralAssignment* warm_start) {
  const int ne = inst.num_edges();
  const int m = inst.n_schools;
  const int g = static_cast<int>(target.values.size());
  if (g != inst.num_groups())
    throw ValidationError("ilp_min_violation: one target per group required");
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(opts.time_budget_s);

  // Minimize sum_j delta_j over y in [0,1]^E, delta >= 0 with student
  // equality rows, relaxed capacity rows and utility rows.
  LpProblem lp;
  lp.sense = Sense::Minimize;
  for (int e = 0; e < ne; ++e) lp.add_variable(0.0, 1.0, 0.0);
  std::vector<int> dvar(m);
  for (int j = 0; j < m; ++j) dvar[j] = lp.add_variable(0.0, kInf, 1.0);
  for (int i = 0; i < inst.n_students; ++i) {
    std::vector<std::pair<int, double>> row;
    for (int e : inst.student_edges()[i]) row.push_back({e, 1.0});
    lp.add_row(Relation::Equal, 1.0, std::move(row));
  }
  for (int j = 0; j < m; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int e : inst.school_edges()[j]) row.push_back({e, 1.0});
    row.push_back({dvar[j], -1.0});
    lp.add_row(Relation::LessEqual, static_cast<double>(inst.capacities[j]), std::move(row));
  }
  const SideRows side = utility_side_rows(inst, target);
  for (int l = 0; l < g; ++l) {
    std::vector<std::pair<int, double>> row(side.coeffs[l].begin(), side.coeffs[l].end());
    lp.add_row(Relation::GreaterEqual, side.rhs[l], std::move(row));
  }

  // Incumbent: caller's warm start, else the all-argmax assignment —
  // it maximizes every group utility simultaneously, so it meets any
  // fractionally achievable target.
  IlpResult out;
  if (warm_start != nullptr) {
    check_assignment(inst, *warm_start);
    if (!meets_targets(inst, *warm_start, target))
      throw ValidationError("ilp_min_violation: warm start misses a utility target");
    out.assignment = *warm_start;
  } else {
    out.assignment.school_of.assign(inst.n_students, -1);
    for (int i = 0; i < inst.n_students; ++i) {
      double best_u = -1.0;
      for (int e : inst.student_edges()[i]) {
        const Edge& ed = inst.edges[e];
        if (ed.utility > best_u ||
            (ed.utility == best_u && ed.school < out.assignment.school_of[i]))
          out.assignment.school_of[i] = ed.school, best_u = ed.utility;
      }
    }
  }

  SimplexSolver solver;
  solver.load(lp);
  {
    // Crash from the incumbent: every row but possibly some capacity
    // rows is satisfied there (delta absorbs overloads in phase 1), so
    // the root solve starts essentially feasible and only has to drive
    // sum delta down.
    std::vector<int> crash(lp.rows.size(), -1);
    for (int i = 0; i < inst.n_students; ++i)
      for (int e : inst.student_edges()[i])
        if (inst.edges[e].school == out.assignment.school_of[i]) crash[i] = e;
    solver.crash_basis(crash);
  }
  if (solver.solve() != SolveStatus::Optimal)
    throw InfeasibleError("ilp_min_violation: no fractional assignment meets the targets");
  const double root_bound = solver.objective_value();
  if (warm_start == nullptr && !meets_targets(inst, out.assignment, target))
    throw std::logic_error("ilp_min_violation: argmax incumbent misses a feasible target");
  out.total_violation = recount(inst, out.assignment);

  // Reduced-ILP incumbent: fix every student the root vertex leaves
  // integral and solve the residual problem over the (few) fractional
  // students exactly.  The residual LPs are tiny, so its own
  // branch-and-bound closes in milliseconds, and the composed
  // assignment is usually the true optimum; proving that is then the
  // full-size search's only remaining job.
  auto reduced_incumbent = [&]() {
    if (opts.reduction_depth <= 0) return;
    std::vector<int> frac_students, chosen_edge(inst.n_students, -1);
    for (int i = 0; i < inst.n_students; ++i) {
      bool fractional = false;
      for (int e : inst.student_edges()[i]) {
        const double v = solver.value(e);
        if (v > kFeasTol && v < 1.0 - kFeasTol) fractional = true;
        if (v >= 0.5) chosen_edge[i] = e;
      }
      if (fractional) frac_students.push_back(i);
    }
    if (!frac_students.empty() &&
        static_cast<int>(frac_students.size()) < inst.n_students) {
      Instance sub;
      sub.n_students = static_cast<int>(frac_students.size());
      sub.n_schools = m;
      std::vector<long long> fixed_load(m, 0);
      std::vector<double> fixed_util(g, 0.0);
      std::vector<int> sub_id(inst.n_students, -1);
      for (int s = 0; s < sub.n_students; ++s) sub_id[frac_students[s]] = s;
      for (int i = 0; i < inst.n_students; ++i) {
        if (sub_id[i] >= 0) continue;
        const Edge& ed = inst.edges[chosen_edge[i]];
        ++fixed_load[ed.school];
        for (int k : inst.groups_of_student()[i]) fixed_util[k] += ed.utility;
      }
      for (int j = 0; j < m; ++j)
        sub.capacities.push_back(std::max(0LL, inst.capacities[j] - fixed_load[j]));
      for (int i : frac_students)
        for (int e : inst.student_edges()[i]) {
          Edge ed = inst.edges[e];
          ed.student = sub_id[ed.student];
          sub.edges.push_back(ed);
        }
      for (int k = 0; k < g; ++k) {
        std::vector<int> members;
        for (int i : inst.groups[k])
          if (sub_id[i] >= 0) members.push_back(sub_id[i]);
        sub.groups.push_back(std::move(members));
      }
      sub.validate();
      GroupUtilities sub_target;
      for (int k = 0; k < g; ++k)
        sub_target.values.push_back(target.values[k] - fixed_util[k] -
                                    1e-7 * std::max(1.0, std::abs(target.values[k])));
      IlpOptions sub_opts;
      sub_opts.node_limit = std::min(opts.node_limit, 100'000LL);
      sub_opts.time_budget_s = std::min(
          5.0,
          0.5 * std::chrono::duration<double>(deadline - std::chrono::steady_clock::now()).count());
      sub_opts.reduction_depth = opts.reduction_depth - 1;
      try {
        const IlpResult sr = ilp_min_violation(sub, sub_target, sub_opts);
        IntegralAssignment a;
        a.school_of.assign(inst.n_students, -1);
        for (int i = 0; i < inst.n_students; ++i)
          a.school_of[i] = sub_id[i] >= 0 ? sr.assignment.school_of[sub_id[i]]
                                          : inst.edges[chosen_edge[i]].school;
        if (meets_targets(inst, a, target)) {
          const long long total = recount(inst, a);
          if (total < out.total_violation) {
            out.total_violation = total;
            out.assignment = std::move(a);
          }
        }
      } catch (const InfeasibleError&) {
        // Rounding slack made the residual targets unreachable; the
        // incumbent stands.
      }
    }
  };
  if (static_cast<long long>(std::ceil(root_bound - 1e-6)) < out.total_violation)
    reduced_incumbent();

  std::vector<Node> pool;
  pool.push_back({-1, -1, 0, root_bound});
  // Min-bound first; ties explored deepest-first (larger id) so the
  // search dives toward incumbents.
  using QEntry = std::pair<double, int>;
  auto higher = [](const QEntry& a, const QEntry& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::priority_queue<QEntry, std::vector<QEntry>, decltype(higher)> queue(higher);
  queue.push({root_bound, 0});

  std::vector<signed char> cur(ne, -1), want(ne);
  double frontier = root_bound;
  bool exhausted = false;
  auto prunable = [&](double bound) {
    return static_cast<long long>(std::ceil(bound - 1e-6)) >= out.total_violation;
  };

  while (!queue.empty()) {
    const auto [key, id] = queue.top();
    queue.pop();
    frontier = key;
    if (prunable(key)) {  // best-first: everything left is no better
      queue = {};
      break;
    }
    if (out.nodes >= opts.node_limit || std::chrono::steady_clock::now() >= deadline) {
      exhausted = true;
      break;
    }

    // Reinstall this node's fixings.
    want.assign(ne, -1);
    for (int a = id; a > 0; a = pool[a].parent) want[pool[a].fix_edge] = pool[a].fix_val;
    for (int e = 0; e < ne; ++e)
      if (cur[e] != want[e]) {
        solver.set_bounds(e, want[e] == 1 ? 1.0 : 0.0, want[e] == 0 ? 0.0 : 1.0);
        cur[e] = want[e];
      }
    ++out.nodes;
    if (solver.solve() != SolveStatus::Optimal) continue;
    const double bound = solver.objective_value();
    if (bound < key - 1e-6)
      throw std::logic_error("ilp_min_violation: node bound decreased down a branch");
    pool[id].bound = bound;
    if (prunable(bound)) continue;
    // A node's vertex usually leaves a different integral majority than
    // the root's; re-running the residual exact solve here picks up
    // incumbents the root reduction missed.
    reduced_incumbent();
    if (prunable(bound)) continue;

    // Branch variable: y nearest 1/2, ties lowest edge id.
    int branch = -1;
    double best_dist = 0.5 - kFeasTol;
    for (int e = 0; e < ne; ++e) {
      const double d = std::abs(solver.value(e) - 0.5);
      if (d < best_dist) {
        best_dist = d;
        branch = e;
      }
    }
    if (branch < 0) {
      // Integral vertex: snap to an assignment and recount exactly.
      IntegralAssignment a;
      a.school_of.assign(inst.n_students, -1);
      for (int i = 0; i < inst.n_students; ++i)
        for (int e : inst.student_edges()[i])
          if (solver.value(e) >= 0.5) a.school_of[i] = inst.edges[e].school;
      check_assignment(inst, a);
      if (!meets_targets(inst, a, target))
        throw std::logic_error("ilp_min_violation: integral node misses a utility target");
      const long long total = recount(inst, a);
      if (total < out.total_violation) {
        out.total_violation = total;
        out.assignment = std::move(a);
      }
      continue;
    }
    pool.push_back({id, branch, 0, bound});
    queue.push({bound, static_cast<int>(pool.size()) - 1});
    pool.push_back({id, branch, 1, bound});
    queue.push({bound, static_cast<int>(pool.size()) - 1});
  }

  out.optimal = !exhausted;
  out.lower_bound = out.optimal ? static_cast<double>(out.total_violation)
                                : std::min(frontier, static_cast<double>(out.total_violation));
  return out;
}

}  // namespace fairassign
