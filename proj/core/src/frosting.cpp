#include "fairassign/frosting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairassign/side_rows.hpp"

namespace fairassign {

namespace {

constexpr double kAltTol = 1e-7;   // even/odd alternation check
constexpr double kEqTol = 1e-8;    // internal frosting equality tolerance
constexpr double kCellTol = 1e-9;  // cell-containment classification

/// Dense per-edge coefficients of every side row.
std::vector<std::vector<double>> dense_rows(const SideRows& side, int num_edges) {
  std::vector<std::vector<double>> rows(side.num_rows(), std::vector<double>(num_edges, 0.0));
  for (int l = 0; l < side.num_rows(); ++l)
    for (auto [e, c] : side.coeffs[l]) rows[l][e] = c;
  return rows;
}

/// The better of a student's two supported edges: higher utility with
/// lowest-school-id ties, or plain lowest school id when `by_utility`
/// is off (the general-constraint mode, where "arbitrary" must still be
/// deterministic).
int pick_edge(const Instance& inst, int ea, int eb, bool by_utility) {
  const Edge& a = inst.edges[ea];
  const Edge& b = inst.edges[eb];
  if (!by_utility) return a.school <= b.school ? ea : eb;
  if (a.utility != b.utility) return a.utility > b.utility ? ea : eb;
  return a.school <= b.school ? ea : eb;
}

}  // namespace

long long PathSystem::total_capacity_added() const {
  long long total = 0;
  for (long long c : capacity_added) total += c;
  return total;
}

double Frosting::measure() const {
  double total = 0.0;
  for (auto [a, b] : intervals) total += b - a;
  return total;
}

double Frosting::integral(const std::vector<double>& density) const {
  const int r = static_cast<int>(density.size());
  double total = 0.0;
  for (auto [a, b] : intervals)
    for (int c = 0; c < r; ++c) {
      const double lo = std::max(a, static_cast<double>(c) / r);
      const double hi = std::min(b, static_cast<double>(c + 1) / r);
      if (hi > lo) total += density[c] * (hi - lo);
    }
  return total;
}

PathSystem build_path_system(const Instance& inst, const ResidualState& state) {
  return build_path_system(inst, state, true);
}

PathSystem build_path_system(const Instance& inst, const ResidualState& state, bool by_utility) {
  const int nv = state.num_fractional();
  PathSystem ps;
  ps.fixed_edge.assign(inst.n_students, -1);
  ps.capacity_added.assign(inst.n_schools, 0);

  std::vector<char> removed(nv, 0);
  std::vector<int> student_deg = state.student_degree;
  std::vector<int> school_deg = state.school_degree;
  std::vector<std::vector<int>> vars_of_student(inst.n_students), vars_of_school(inst.n_schools);
  for (int v = 0; v < nv; ++v) {
    const Edge& e = inst.edges[state.edge_of_var[v]];
    vars_of_student[e.student].push_back(v);
    vars_of_school[e.school].push_back(v);
  }

  // Step 1: students of excess degree take their best supported school.
  long long accounted = 0;  // the proof's capacity accounting, <= 4r
  for (int i = 0; i < inst.n_students; ++i) {
    if (student_deg[i] <= 2 || vars_of_student[i].empty()) continue;
    int best = vars_of_student[i][0];
    for (int v : vars_of_student[i])
      best = pick_edge(inst, state.edge_of_var[best], state.edge_of_var[v], by_utility) ==
                     state.edge_of_var[best]
                 ? best
                 : v;
    ps.fixed_edge[i] = state.edge_of_var[best];
    ++ps.capacity_added[inst.edges[ps.fixed_edge[i]].school];
    ++accounted;
    for (int v : vars_of_student[i]) {
      removed[v] = 1;
      --school_deg[inst.edges[state.edge_of_var[v]].school];
    }
    student_deg[i] = 0;
    vars_of_student[i].clear();
  }

  // Step 2: split every school whose surviving row does not force the
  // alternation (S1: tight with excess degree; S2: tight, degree 2 but
  // residual capacity 2; plus all non-tight touched schools) into
  // degree-1 unit-capacity leaves.
  std::vector<char> split(inst.n_schools, 0);
  for (int j = 0; j < inst.n_schools; ++j) {
    if (school_deg[j] <= 0) continue;
    const bool tight = state.school_tight[j] != 0;
    const bool s1 = tight && school_deg[j] > 2;
    const bool s2 = tight && school_deg[j] == 2 &&
                    std::abs(state.residual_capacity[j] - 2.0) <= kFeasTol;
    if (s1) accounted += 1 + (school_deg[j] - 2);
    if (!tight) accounted += school_deg[j];
    if (s1 || s2 || !tight) split[j] = 1;
  }
  if (accounted > 4LL * state.side_row_count)
    throw std::logic_error("build_path_system: capacity accounting exceeds 4g");
  ps.split_school.assign(split.begin(), split.end());

  // Walk the degree-<=2 remainder into alternating components.  An edge
  // connects to its neighbor through the shared student, and through
  // the shared school only when that school is internal (unsplit,
  // degree 2).
  auto partner_via_student = [&](int v) {
    const int i = inst.edges[state.edge_of_var[v]].student;
    for (int w : vars_of_student[i])
      if (w != v && !removed[w]) return w;
    return -1;
  };
  auto partner_via_school = [&](int v) {
    const int j = inst.edges[state.edge_of_var[v]].school;
    if (split[j] || school_deg[j] != 2) return -1;
    for (int w : vars_of_school[j])
      if (w != v && !removed[w]) return w;
    return -1;
  };

  std::vector<char> visited(nv, 0);
  auto emit_component = [&](const std::vector<int>& walk, bool cycle) {
    if (walk.size() % 2 != 0)
      throw std::logic_error("build_path_system: odd-length component");
    FrostComponent comp;
    comp.cycle = cycle;
    comp.alpha = state.frac_value[walk[0]];
    for (size_t t = 0; t + 1 < walk.size(); t += 2) {
      const int ve = walk[t], vo = walk[t + 1];
      const Edge& ee = inst.edges[state.edge_of_var[ve]];
      if (ee.student != inst.edges[state.edge_of_var[vo]].student)
        throw std::logic_error("build_path_system: walk lost alternation");
      if (std::abs(state.frac_value[ve] - comp.alpha) > kAltTol ||
          std::abs(state.frac_value[vo] - (1.0 - comp.alpha)) > kAltTol)
        throw std::logic_error("build_path_system: even/odd fractions are not alpha/1-alpha");
      comp.students.push_back(ee.student);
      comp.even_edge.push_back(state.edge_of_var[ve]);
      comp.odd_edge.push_back(state.edge_of_var[vo]);
    }
    ps.components.push_back(std::move(comp));
  };

  // Paths first: start at every free school end, in ascending var order.
  for (int v0 = 0; v0 < nv; ++v0) {
    if (removed[v0] || visited[v0] || partner_via_school(v0) >= 0) continue;
    std::vector<int> walk;
    int v = v0;
    while (v >= 0) {
      visited[v] = 1;
      walk.push_back(v);
      int w = partner_via_student(v);
      if (w < 0) throw std::logic_error("build_path_system: student of degree != 2");
      visited[w] = 1;
      walk.push_back(w);
      v = partner_via_school(w);
    }
    emit_component(walk, false);
  }
  // Remaining components are cycles.
  for (int v0 = 0; v0 < nv; ++v0) {
    if (removed[v0] || visited[v0]) continue;
    std::vector<int> walk;
    int v = v0;
    do {
      visited[v] = 1;
      walk.push_back(v);
      const int w = partner_via_student(v);
      if (w < 0) throw std::logic_error("build_path_system: student of degree != 2");
      visited[w] = 1;
      walk.push_back(w);
      v = partner_via_school(w);
      if (v < 0) throw std::logic_error("build_path_system: cycle walk fell off");
    } while (v != v0);
    emit_component(walk, true);
  }
  return ps;
}

PathSystem cycles_to_paths(const Instance& inst, PathSystem ps) {
  return cycles_to_paths(inst, std::move(ps), true);
}

PathSystem cycles_to_paths(const Instance& inst, PathSystem ps, bool by_utility) {
  long long broken = 0;
  for (FrostComponent& comp : ps.components) {
    if (!comp.cycle) continue;
    ++broken;
    const int r = static_cast<int>(comp.students.size());
    int t0 = 0;
    for (int t = 1; t < r; ++t)
      if (comp.students[t] < comp.students[t0]) t0 = t;
    const int fixed =
        pick_edge(inst, comp.even_edge[t0], comp.odd_edge[t0], by_utility);
    ps.fixed_edge[comp.students[t0]] = fixed;
    ++ps.capacity_added[inst.edges[fixed].school];
    FrostComponent path;
    path.alpha = comp.alpha;
    for (int s = 1; s < r; ++s) {
      const int t = (t0 + s) % r;
      path.students.push_back(comp.students[t]);
      path.even_edge.push_back(comp.even_edge[t]);
      path.odd_edge.push_back(comp.odd_edge[t]);
    }
    comp = std::move(path);
  }
  std::erase_if(ps.components, [](const FrostComponent& c) { return c.students.empty(); });
  return ps;
}

std::vector<double> solve_component_lp(const SideRows& side, const Instance& inst,
                                       const PathSystem& ps,
                                       const std::vector<double>& residual_target,
                                       const std::vector<double>* preference) {
  const int nc = static_cast<int>(ps.components.size());
  if (preference != nullptr && preference->size() != static_cast<size_t>(nc))
    throw ValidationError("solve_component_lp: one preference entry per component required");
  const int nr = side.num_rows();
  if (residual_target.size() != static_cast<size_t>(nr))
    throw ValidationError("solve_component_lp: one target per side row required");
  const std::vector<std::vector<double>> coeff = dense_rows(side, inst.num_edges());

  LpProblem lp;
  for (int c = 0; c < nc; ++c) lp.add_variable(0.0, 1.0, preference ? (*preference)[c] : 0.0);
  for (int l = 0; l < nr; ++l) {
    double odd_total = 0.0;
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < nc; ++c) {
      double ue = 0.0, uo = 0.0;
      const FrostComponent& comp = ps.components[c];
      for (size_t t = 0; t < comp.students.size(); ++t) {
        ue += coeff[l][comp.even_edge[t]];
        uo += coeff[l][comp.odd_edge[t]];
      }
      odd_total += uo;
      if (ue != uo) row.push_back({c, ue - uo});
    }
    // z = alpha satisfies this exactly by construction; the slack only
    // absorbs simplex arithmetic noise.
    lp.add_row(Relation::GreaterEqual, residual_target[l] - odd_total - kEqTol, std::move(row));
  }
  SolveResult res = solve_vertex(lp);
  if (res.status != SolveStatus::Optimal)
    throw std::logic_error("solve_component_lp: LP infeasible against its own construction");
  int fractional = 0;
  for (double z : res.solution.values)
    if (z > kFeasTol && z < 1.0 - kFeasTol) ++fractional;
  if (fractional > nr)
    throw std::logic_error("solve_component_lp: more fractional components than side rows");
  return res.solution.values;
}

Frosting perfect_frosting(const FrostingProblem& p, int max_intervals) {
  const int r = p.cells;
  if (r <= 0) throw ValidationError("perfect_frosting: cell count must be positive");
  if (!(p.alpha > 0.0 && p.alpha < 1.0))
    throw ValidationError("perfect_frosting: alpha must lie in (0,1)");
  for (const auto& row : p.density)
    if (row.size() != static_cast<size_t>(r))
      throw ValidationError("perfect_frosting: density row length must equal cell count");

  std::vector<int> players;
  for (size_t l = 0; l < p.density.size(); ++l)
    for (double d : p.density[l])
      if (d != 0.0) {
        players.push_back(static_cast<int>(l));
        break;
      }
  const int g_eff = static_cast<int>(players.size());
  const int kmax = max_intervals > 0 ? max_intervals : std::max(1, 2 * g_eff - 1);
  const double width = 1.0 / r;

  // Prefix integrals F[l][c] = integral of f_l over [0, c/r].
  std::vector<std::vector<double>> prefix(g_eff, std::vector<double>(r + 1, 0.0));
  std::vector<double> target(g_eff);
  for (int a = 0; a < g_eff; ++a) {
    const std::vector<double>& d = p.density[players[a]];
    for (int c = 0; c < r; ++c) prefix[a][c + 1] = prefix[a][c] + d[c] * width;
    target[a] = p.alpha * prefix[a][r];
  }

  for (int k = 1; k <= kmax; ++k) {
    const int np = 2 * k;
    std::vector<int> cell(np, 0);  // nondecreasing placement odometer
    while (true) {
      // Quick reject: per player, the reachable integral range with the
      // endpoints moved independently inside their cells must cover the
      // target (necessary; ordering only shrinks the range).
      bool plausible = true;
      for (int a = 0; a < g_eff && plausible; ++a) {
        const std::vector<double>& d = p.density[players[a]];
        double lo = 0.0, hi = 0.0;
        for (int t = 0; t < np; ++t) {
          const double sgn = (t % 2 == 0) ? -1.0 : 1.0;  // pairs contribute F(x2) - F(x1)
          const double base = sgn * prefix[a][cell[t]];
          const double span = sgn * d[cell[t]] * width;
          lo += base + std::min(0.0, span);
          hi += base + std::max(0.0, span);
        }
        plausible = target[a] >= lo - kEqTol && target[a] <= hi + kEqTol;
      }
      if (plausible) {
        LpProblem lp;
        for (int t = 0; t < np; ++t)
          lp.add_variable(cell[t] * width, (cell[t] + 1) * width, 0.0);
        for (int t = 0; t + 1 < np; ++t)
          lp.add_row(Relation::GreaterEqual, 0.0, {{t + 1, 1.0}, {t, -1.0}});
        for (int a = 0; a < g_eff; ++a) {
          const std::vector<double>& d = p.density[players[a]];
          double rhs = target[a];
          std::vector<std::pair<int, double>> row;
          for (int t = 0; t < np; ++t) {
            const double sgn = (t % 2 == 0) ? -1.0 : 1.0;
            rhs -= sgn * (prefix[a][cell[t]] - d[cell[t]] * cell[t] * width);
            if (d[cell[t]] != 0.0) row.push_back({t, sgn * d[cell[t]]});
          }
          lp.add_row(Relation::GreaterEqual, rhs - kEqTol, row);
          lp.add_row(Relation::LessEqual, rhs + kEqTol, std::move(row));
        }
        SolveResult res = solve_vertex(lp);
        if (res.status == SolveStatus::Optimal) {
          Frosting x;
          for (int s = 0; s < k; ++s) {
            const double a = res.solution.values[2 * s];
            const double b = res.solution.values[2 * s + 1];
            if (b - a <= 1e-12) continue;
            if (!x.intervals.empty() && a - x.intervals.back().second <= 1e-12)
              x.intervals.back().second = b;
            else
              x.intervals.push_back({a, b});
          }
          return x;
        }
      }
      // Advance the nondecreasing odometer.
      int t = np - 1;
      while (t >= 0 && cell[t] == r - 1) --t;
      if (t < 0) break;
      const int next = cell[t] + 1;
      for (int s = t; s < np; ++s) cell[s] = next;
    }
  }
  throw std::logic_error("perfect_frosting: exhausted the interval search");
}

void frost_round_component(const Instance& inst, const FrostComponent& comp, const Frosting& x,
                           std::vector<int>& school_of) {
  frost_round_component(inst, comp, x, school_of, true);
}

void frost_round_component(const Instance& inst, const FrostComponent& comp, const Frosting& x,
                           std::vector<int>& school_of, bool by_utility) {
  const int r = static_cast<int>(comp.students.size());
  for (int t = 0; t < r; ++t) {
    const double lo = static_cast<double>(t) / r;
    const double hi = static_cast<double>(t + 1) / r;
    double covered = 0.0;
    for (auto [a, b] : x.intervals) {
      const double cl = std::max(a, lo), ch = std::min(b, hi);
      if (ch > cl) covered += ch - cl;
    }
    int e;
    if (covered >= (hi - lo) - kCellTol)
      e = comp.even_edge[t];
    else if (covered <= kCellTol)
      e = comp.odd_edge[t];
    else
      e = pick_edge(inst, comp.even_edge[t], comp.odd_edge[t], by_utility);
    school_of[comp.students[t]] = inst.edges[e].school;
  }
}

IntegralAssignment frost_assign(const Instance& inst, const SideRows& side,
                                const ResidualState& state, bool by_utility) {
  const int g = side.num_rows();

  PathSystem ps = cycles_to_paths(inst, build_path_system(inst, state, by_utility), by_utility);
  const std::vector<std::vector<double>> coeff = dense_rows(side, inst.num_edges());
  std::vector<double> residual(g);
  for (int l = 0; l < g; ++l) {
    residual[l] = l < static_cast<int>(state.residual_rhs.size()) ? state.residual_rhs[l] : 0.0;
    for (int i = 0; i < inst.n_students; ++i)
      if (ps.fixed_edge[i] >= 0) residual[l] -= coeff[l][ps.fixed_edge[i]];
  }
  // Greedy vertex preference: the LP's utility rows are usually slack,
  // leaving many optimal vertices; steer each component toward the
  // matching that overloads split schools the least.  Internal schools
  // absorb exactly one student per adjacent edge pair either way, so
  // only split schools can overflow.
  std::vector<double> room(inst.n_schools, 0.0);
  for (int j = 0; j < inst.n_schools; ++j) room[j] = state.residual_capacity[j];
  for (int i = 0; i < inst.n_students; ++i)
    if (ps.fixed_edge[i] >= 0) room[inst.edges[ps.fixed_edge[i]].school] -= 1.0;
  std::vector<double> preference(ps.components.size(), 0.0);
  {
    std::vector<double> load(inst.n_schools, 0.0);
    auto delta = [&](const std::vector<int>& edges) {
      double d = 0.0;
      for (int e : edges) {
        const int j = inst.edges[e].school;
        if (!ps.split_school[j]) continue;
        d += std::max(0.0, load[j] + 1.0 - room[j]) - std::max(0.0, load[j] - room[j]);
        load[j] += 1.0;
      }
      for (int e : edges)
        if (ps.split_school[inst.edges[e].school]) load[inst.edges[e].school] -= 1.0;
      return d;
    };
    for (size_t c = 0; c < ps.components.size(); ++c) {
      const FrostComponent& comp = ps.components[c];
      const double de = delta(comp.even_edge);
      const double dd = delta(comp.odd_edge);
      const bool even = de != dd ? de < dd : comp.alpha >= 0.5;
      preference[c] = even ? 1.0 : -1.0;
      for (int e : even ? comp.even_edge : comp.odd_edge)
        if (ps.split_school[inst.edges[e].school]) load[inst.edges[e].school] += 1.0;
    }
  }
  const std::vector<double> z =
      ps.components.empty() ? std::vector<double>{}
                            : solve_component_lp(side, inst, ps, residual, &preference);

  IntegralAssignment out;
  out.school_of = state.fixed_school;
  for (int i = 0; i < inst.n_students; ++i)
    if (ps.fixed_edge[i] >= 0) out.school_of[i] = inst.edges[ps.fixed_edge[i]].school;
  for (size_t c = 0; c < ps.components.size(); ++c) {
    const FrostComponent& comp = ps.components[c];
    const int r = static_cast<int>(comp.students.size());
    if (z[c] >= 1.0 - kFeasTol || z[c] <= kFeasTol) {
      const std::vector<int>& pick = z[c] >= 0.5 ? comp.even_edge : comp.odd_edge;
      for (int t = 0; t < r; ++t) out.school_of[comp.students[t]] = inst.edges[pick[t]].school;
      continue;
    }
    FrostingProblem prob;
    prob.cells = r;
    prob.alpha = z[c];
    prob.density.assign(g, std::vector<double>(r, 0.0));
    for (int l = 0; l < g; ++l)
      for (int t = 0; t < r; ++t)
        prob.density[l][t] = r * (coeff[l][comp.even_edge[t]] - coeff[l][comp.odd_edge[t]]);
    frost_round_component(inst, comp, perfect_frosting(prob), out.school_of, by_utility);
  }

  for (int i = 0; i < inst.n_students; ++i)
    if (out.school_of[i] < 0) throw std::logic_error("frost_assign: student left unassigned");
  return out;
}

RoundResult frost_pipeline_core(const Instance& inst, const FairTarget& target,
                                const ResidualState& state) {
  const SideRows side = utility_side_rows(inst, target.target);
  const int g = side.num_rows();
  RoundResult out;
  out.assignment = frost_assign(inst, side, state, true);
  out.report = violation_report(inst, out.assignment);
  out.utilities = group_utilities(inst, out.assignment);
  for (int l = 0; l < g; ++l)
    if (out.utilities.values[l] < target.target.values[l] - 1e-6)
      throw std::logic_error("frost_pipeline: target utility missed beyond tolerance");
  if (out.report.total_overflow > 4LL * g * g + 3LL * g)
    throw std::logic_error("frost_pipeline: overflow bound 4g^2+3g exceeded");
  return out;
}

RoundResult frost_pipeline(const Instance& inst, const FairTarget& target) {
  const SideRows side = utility_side_rows(inst, target.target);
  return frost_pipeline_core(inst, target, iterate_to_fractional_core(inst, side));
}

}  // namespace fairassign
