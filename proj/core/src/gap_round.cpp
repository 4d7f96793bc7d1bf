#include "fairassign/gap_round.hpp"

#include <algorithm>
#include <stdexcept>

#include "fairassign/matching.hpp"

namespace fairassign {

namespace {

/// Integral within the fixing tolerance; snapped exactly when fixed.
bool near(double v, double target) { return std::abs(v - target) <= kFeasTol; }

}  // namespace

long long ResidualState::excess_degree_total() const {
  long long total = 0;
  const int n = static_cast<int>(student_active.size());
  const int m = static_cast<int>(school_active.size());
  for (int i = 0; i < n; ++i)
    if (student_active[i]) total += student_degree[i] - 2;
  for (int j = 0; j < m; ++j) {
    if (!school_active[j]) continue;
    total += school_tight[j] ? school_degree[j] - 2 : school_degree[j];
  }
  return total;
}

ResidualState iterate_on_lp(const Instance& inst, LpProblem lp, std::vector<RowInfo> row_info,
                            std::vector<int> edge_of_var, int side_row_count,
                            SimplexSolver* presolved) {
  if (lp.rows.size() != row_info.size())
    throw std::logic_error("iterate_on_lp: row_info size mismatch");
  if (static_cast<size_t>(lp.num_vars) != edge_of_var.size())
    throw std::logic_error("iterate_on_lp: edge_of_var size mismatch");

  ResidualState st;
  st.fixed_school.assign(inst.n_students, -1);
  st.side_row_count = side_row_count;

  VertexSolution sol;
  const int max_iters = inst.num_edges() + 2;
  for (int iter = 0;; ++iter) {
    if (iter >= max_iters) throw std::logic_error("iterate_on_lp: fixing loop failed to converge");
    if (iter == 0 && presolved != nullptr) {
      if (presolved->solve() != SolveStatus::Optimal)
        throw InfeasibleError("iterate_on_lp: LP infeasible");
      sol = presolved->extract();
    } else {
      SolveResult res = solve_vertex(lp);
      if (res.status != SolveStatus::Optimal) throw InfeasibleError("iterate_on_lp: LP infeasible");
      sol = std::move(res.solution);
    }

    std::vector<std::pair<int, double>> fixes;
    for (int v = 0; v < lp.num_vars; ++v) {
      if (near(sol.values[v], 0.0)) fixes.push_back({v, 0.0});
      else if (near(sol.values[v], 1.0)) fixes.push_back({v, 1.0});
    }
    if (fixes.empty()) break;

    for (auto [v, val] : fixes)
      if (val == 1.0) {
        const Edge& e = inst.edges[edge_of_var[v]];
        st.fixed_school[e.student] = e.school;
      }
    std::vector<int> kept;
    lp = fix_variables(lp, fixes, &kept);
    std::vector<RowInfo> new_info;
    new_info.reserve(kept.size());
    for (int r : kept) new_info.push_back(row_info[r]);
    row_info = std::move(new_info);
    std::vector<int> new_map;
    new_map.reserve(edge_of_var.size() - fixes.size());
    size_t next_fix = 0;
    for (size_t v = 0; v < edge_of_var.size(); ++v) {
      if (next_fix < fixes.size() && fixes[next_fix].first == static_cast<int>(v)) {
        ++next_fix;
        continue;
      }
      new_map.push_back(edge_of_var[v]);
    }
    edge_of_var = std::move(new_map);
  }

  st.lp = std::move(lp);
  st.row_info = std::move(row_info);
  st.edge_of_var = std::move(edge_of_var);
  st.frac_value = sol.values;
  st.row_tight = sol.row_tight;

  st.student_active.assign(inst.n_students, 0);
  st.school_active.assign(inst.n_schools, 0);
  st.school_tight.assign(inst.n_schools, 0);
  st.residual_capacity.assign(inst.n_schools, 0.0);
  st.residual_rhs.assign(side_row_count, 0.0);
  st.student_degree.assign(inst.n_students, 0);
  st.school_degree.assign(inst.n_schools, 0);
  for (int e : st.edge_of_var) {
    ++st.student_degree[inst.edges[e].student];
    ++st.school_degree[inst.edges[e].school];
    st.student_active[inst.edges[e].student] = 1;
    st.school_active[inst.edges[e].school] = 1;
  }
  for (size_t r = 0; r < st.row_info.size(); ++r) {
    const RowInfo& info = st.row_info[r];
    if (info.kind == RowKind::Capacity) {
      st.residual_capacity[info.index] = st.lp.rows[r].rhs;
      if (st.school_active[info.index] && st.row_tight[r]) st.school_tight[info.index] = 1;
    } else if (info.kind == RowKind::Side) {
      st.residual_rhs[info.index] = st.lp.rows[r].rhs;
    }
  }

  // Structural invariants of the fractional core.
  for (int i = 0; i < inst.n_students; ++i) {
    if (st.student_active[i] && st.fixed_school[i] >= 0)
      throw std::logic_error("iterate_on_lp: student both fixed and fractional");
    if (st.student_active[i] && st.student_degree[i] < 2)
      throw std::logic_error("iterate_on_lp: fractional student of degree < 2");
  }
  for (int j = 0; j < inst.n_schools; ++j)
    if (st.school_tight[j] && st.school_degree[j] < 2)
      throw std::logic_error("iterate_on_lp: tight school of degree < 2");
  if (st.excess_degree_total() > 2LL * side_row_count)
    throw std::logic_error("iterate_on_lp: excess-degree bound violated");
  return st;
}

ResidualState iterate_to_fractional_core(const Instance& inst, const SideRows& side,
                                         bool capacity_rows, SimplexSolver* presolved) {
  std::vector<RowInfo> info;
  LpProblem lp = build_assignment_lp(inst, side, capacity_rows, &info);
  std::vector<int> edge_of_var(inst.num_edges());
  for (int e = 0; e < inst.num_edges(); ++e) edge_of_var[e] = e;
  SimplexSolver local;
  if (presolved == nullptr) {
    // Crash from an integral max-flow assignment: feasible in every row
    // but the side rows, so the first solve skips almost all of phase 1.
    local.load(lp);
    try {
      const std::vector<int> assign = feasible_assignment(inst);
      std::vector<int> crash(lp.rows.size(), -1);
      for (size_t r = 0; r < info.size(); ++r)
        if (info[r].kind == RowKind::Student) crash[r] = assign[info[r].index];
      local.crash_basis(crash);
    } catch (const InfeasibleError&) {
      // No integral assignment; start cold and let phase 1 decide.
    }
    presolved = &local;
  }
  return iterate_on_lp(inst, std::move(lp), std::move(info), std::move(edge_of_var),
                       side.num_rows(), presolved);
}

RoundResult gap_round_core(const Instance& inst, const ResidualState& state) {
  RoundResult out;
  out.assignment.school_of = state.fixed_school;
  // Supported edges of each remaining student, for the argmax step.
  std::vector<std::vector<int>> support(inst.n_students);
  for (int e : state.edge_of_var) support[inst.edges[e].student].push_back(e);
  for (int i = 0; i < inst.n_students; ++i) {
    if (out.assignment.school_of[i] >= 0) continue;
    if (support[i].empty()) throw std::logic_error("gap_round_core: unassigned isolated student");
    int best = -1;
    double best_u = -1.0;
    for (int e : support[i]) {
      const Edge& ed = inst.edges[e];
      if (ed.utility > best_u || (ed.utility == best_u && ed.school < best)) {
        best = ed.school;
        best_u = ed.utility;
      }
    }
    out.assignment.school_of[i] = best;
  }
  out.report = violation_report(inst, out.assignment);
  out.utilities = group_utilities(inst, out.assignment);
  return out;
}

RoundResult gap_round(const Instance& inst, const FairTarget& target) {
  const SideRows side = utility_side_rows(inst, target.target);
  return gap_round_core(inst, iterate_to_fractional_core(inst, side));
}

}  // namespace fairassign
