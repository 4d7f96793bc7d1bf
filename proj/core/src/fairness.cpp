#include "fairassign/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "fairassign/matching.hpp"

namespace fairassign {

namespace {

constexpr int kKelleyCap = 500;
constexpr double kFloorScale = 1e-9;

std::vector<double> group_weights(const Objective& obj, int g) {
  if (obj.weights.empty()) return std::vector<double>(g, 1.0);
  return obj.weights;
}

/// Per-edge objective coefficients u_e restricted to group k's members.
std::vector<double> masked_utilities(const Instance& inst, int k) {
  std::vector<double> mask(inst.num_edges(), 0.0);
  for (int i : inst.groups[k])
    for (int e : inst.student_edges()[i]) mask[e] = inst.edges[e].utility;
  return mask;
}

FractionalAssignment extract_witness(const std::vector<double>& y, int num_edges) {
  FractionalAssignment a;
  a.values.assign(y.begin(), y.begin() + num_edges);
  for (double& v : a.values) v = std::clamp(v, 0.0, 1.0);
  return a;
}

/// Safeguarded concave term: f below `floor` is extended linearly with
/// slope f'(floor), keeping the model concave and finite at 0.
struct ConcaveTerm {
  ObjectiveKind kind;
  double weight;
  double exponent;
  double floor;

  double raw(double u) const {
    return kind == ObjectiveKind::NashWelfare ? weight * std::log(u)
                                              : weight * std::pow(u, exponent);
  }
  double raw_slope(double u) const {
    return kind == ObjectiveKind::NashWelfare ? weight / u
                                              : weight * exponent * std::pow(u, exponent - 1.0);
  }
  double value(double u) const {
    if (u >= floor) return raw(u);
    return raw(floor) + raw_slope(floor) * (u - floor);
  }
  double slope(double u) const { return raw_slope(std::max(u, floor)); }
};

}  // namespace

void Objective::check(int num_groups) const {
  if (!weights.empty() && static_cast<int>(weights.size()) != num_groups)
    throw ValidationError("Objective.weights: size must equal group count");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("Objective.weights: entries must be finite and >= 0");
  if (kind == ObjectiveKind::CES && !(exponent > 0.0 && exponent <= 1.0))
    throw ValidationError("Objective.exponent: CES requires r in (0,1]");
}

LpProblem build_lp1(const Instance& inst, const GroupUtilities& target) {
  return build_assignment_lp(inst, utility_side_rows(inst, target));
}

std::vector<double> proportionality_check(const Instance& inst, const GroupUtilities& u) {
  if (u.values.size() != static_cast<size_t>(inst.num_groups()))
    throw ValidationError("proportionality_check: utility vector size mismatch");
  SimplexSolver solver;
  solver.load(build_assignment_lp(inst, SideRows{}));
  if (solver.solve() != SolveStatus::Optimal)
    throw InfeasibleError("proportionality_check: assignment polytope is empty");
  std::vector<double> ratios(inst.num_groups());
  for (int k = 0; k < inst.num_groups(); ++k) {
    solver.set_objective(masked_utilities(inst, k), Sense::Maximize);
    if (solver.solve() != SolveStatus::Optimal)
      throw InfeasibleError("proportionality_check: solo solve failed");
    const double solo = solver.objective_value();
    ratios[k] = solo > 1e-12 ? u.values[k] / solo : 1.0;
  }
  return ratios;
}

FairTarget maximize_fairness(const Instance& inst, const Objective& obj, double eps) {
  const int g = inst.num_groups();
  const int ne = inst.num_edges();
  obj.check(g);
  const std::vector<double> weights = group_weights(obj, g);

  if (g == 0 || obj.kind == ObjectiveKind::LinearWelfare) {
    LpProblem p = build_assignment_lp(inst, SideRows{});
    for (int k = 0; k < g; ++k) {
      const std::vector<double> mask = masked_utilities(inst, k);
      for (int e = 0; e < ne; ++e) p.objective[e] += weights[k] * mask[e];
    }
    SolveResult res = solve_vertex(p);
    if (res.status != SolveStatus::Optimal)
      throw InfeasibleError("maximize_fairness: assignment polytope is empty");
    FairTarget t;
    t.witness = extract_witness(res.solution.values, ne);
    t.target = group_utilities(inst, t.witness);
    t.objective_value = 0.0;
    for (int k = 0; k < g; ++k) t.objective_value += weights[k] * t.target.values[k];
    return t;
  }

  if (obj.kind == ObjectiveKind::MaxMin) {
    LpProblem p = build_assignment_lp(inst, SideRows{});
    double ub = 0.0;
    for (const Edge& e : inst.edges) ub += e.utility;
    const int tvar = p.add_variable(0.0, std::max(ub, 1.0), 1.0);
    for (int k = 0; k < g; ++k) {
      const std::vector<double> mask = masked_utilities(inst, k);
      std::vector<std::pair<int, double>> coeffs;
      for (int e = 0; e < ne; ++e)
        if (mask[e] != 0.0) coeffs.push_back({e, mask[e]});
      coeffs.push_back({tvar, -1.0});
      p.add_row(Relation::GreaterEqual, 0.0, std::move(coeffs));
    }
    SolveResult res = solve_vertex(p);
    if (res.status != SolveStatus::Optimal)
      throw InfeasibleError("maximize_fairness: assignment polytope is empty");
    FairTarget t;
    t.witness = extract_witness(res.solution.values, ne);
    t.target = group_utilities(inst, t.witness);
    t.objective_value = res.solution.objective;
    return t;
  }

  // NashWelfare / CES: Kelley cutting planes over the LP oracle.
  // Master variables: y_e, then U_k (defined by equality rows), then
  // epigraph variables t_k with cuts t_k <= f(U^) + f'(U^)(U_k - U^).
  std::vector<int> start;
  try {
    start = feasible_assignment(inst);
  } catch (const InfeasibleError&) {
    throw InfeasibleError("maximize_fairness: assignment polytope is empty");
  }
  // Cheap valid bound on each group's utility — every member scores at
  // most its best edge.  The tangent grid below only needs the right
  // order of magnitude, so exact per-group LP maxima would be wasted.
  std::vector<double> umax(g, 0.0);
  for (int k = 0; k < g; ++k) {
    for (int i : inst.groups[k]) {
      double bestu = 0.0;
      for (int e : inst.student_edges()[i]) bestu = std::max(bestu, inst.edges[e].utility);
      umax[k] += bestu;
    }
    if (umax[k] <= 1e-12)
      throw ValidationError("maximize_fairness: group " + std::to_string(k) +
                            " cannot achieve positive utility; drop or reweight it");
  }

  std::vector<ConcaveTerm> terms;
  for (int k = 0; k < g; ++k)
    terms.push_back({obj.kind, weights[k], obj.exponent, kFloorScale * umax[k]});

  LpProblem master = build_assignment_lp(inst, SideRows{});
  std::vector<int> uvar(g), tvar(g);
  for (int k = 0; k < g; ++k) {
    uvar[k] = master.add_variable(0.0, umax[k], 0.0);
    const std::vector<double> mask = masked_utilities(inst, k);
    std::vector<std::pair<int, double>> coeffs;
    for (int e = 0; e < ne; ++e)
      if (mask[e] != 0.0) coeffs.push_back({e, mask[e]});
    coeffs.push_back({uvar[k], -1.0});
    master.add_row(Relation::Equal, 0.0, std::move(coeffs));
  }
  for (int k = 0; k < g; ++k)
    tvar[k] = master.add_variable(terms[k].value(0.0), terms[k].value(umax[k]), 1.0);
  // Seed each epigraph with tangents on a geometric grid so the first
  // master solve already works with a good model of f and the cutting
  // loop only refines near the optimum.
  for (int k = 0; k < g; ++k)
    for (double uhat = umax[k]; uhat >= terms[k].floor && uhat > umax[k] / 512.0;
         uhat /= std::sqrt(2.0)) {
      const double slope = terms[k].slope(uhat);
      master.add_row(Relation::LessEqual, terms[k].value(uhat) - slope * uhat,
                     {{tvar[k], 1.0}, {uvar[k], -slope}});
    }

  if (std::getenv("FAIRASSIGN_TRACE")) std::fprintf(stderr, "loading master\n");
  SimplexSolver solver;
  solver.load(master);
  // Crash basis from the integral flow: assigned edges cover the
  // student rows, each U_k covers its defining row.  The start is
  // feasible in everything but the tangent rows, so phase 1 is cheap
  // and phase 2 starts from a genuine assignment.
  {
    std::vector<int> crash(master.rows.size(), -1);
    for (int i = 0; i < inst.n_students; ++i) crash[i] = start[i];
    for (int k = 0; k < g; ++k) crash[inst.n_students + inst.n_schools + k] = uvar[k];
    solver.crash_basis(crash);
  }
  double lb = -kInf;
  FairTarget best;
  // Distinct master iterates, kept for primal averaging below.  Each
  // iterate is a vertex of the assignment polytope; the cutting-plane
  // sequence alone never leaves the vertex set, so the averaged point
  // is the only way to recover an interior primal solution.
  std::vector<std::vector<double>> iterates;
  double final_ub = kInf;
  int cuts = 0;
  for (int iter = 0; iter < kKelleyCap; ++iter) {
    if (solver.solve() != SolveStatus::Optimal)
      throw InfeasibleError("maximize_fairness: master LP lost feasibility");
    const std::vector<double> x = solver.values();
    FractionalAssignment witness = extract_witness(x, ne);
    GroupUtilities exact = group_utilities(inst, witness);
    double cur = 0.0, ub = 0.0;
    for (int k = 0; k < g; ++k) {
      cur += terms[k].value(exact.values[k]);
      ub += x[tvar[k]];
    }
    bool fresh = true;
    for (const std::vector<double>& prev : iterates) {
      double d = 0.0;
      for (int e = 0; e < ne; ++e) d = std::max(d, std::abs(prev[e] - witness.values[e]));
      if (d <= 1e-9) {
        fresh = false;
        break;
      }
    }
    if (fresh) iterates.push_back(witness.values);
    if (cur > lb) {
      lb = cur;
      best.witness = std::move(witness);
      best.target = std::move(exact);
      best.objective_value = cur;
    }
    final_ub = ub;
    if (std::getenv("FAIRASSIGN_TRACE"))
      std::fprintf(stderr, "kelley iter=%d cuts=%d lb=%.10f cur=%.10f ub=%.10f\n", iter, cuts,
                   lb, cur, ub);
    if (ub - lb <= eps * std::max(1.0, std::abs(lb))) break;
    bool cut_added = false;
    for (int k = 0; k < g; ++k) {
      const double uhat = x[uvar[k]];
      const double fhat = terms[k].value(uhat);
      if (x[tvar[k]] <= fhat + 1e-12) continue;
      const double slope = terms[k].slope(uhat);
      solver.add_row(Relation::LessEqual, fhat - slope * uhat,
                     {{tvar[k], 1.0}, {uvar[k], -slope}});
      ++cuts;
      cut_added = true;
    }
    if (!cut_added) break;
  }
  best.cut_count = cuts;

  // Primal averaging with an optimality safeguard.  The incumbent is a
  // vertex; the average of the distinct iterates lies in the interior
  // of the near-optimal region.  Move from the incumbent toward the
  // average as far as the remaining tolerance budget allows, so the
  // returned point still satisfies the relative-eps contract while
  // being a genuine interior solution of the concave program rather
  // than an arbitrarily tie-broken vertex of its optimal face.
  if (iterates.size() > 1) {
    std::vector<double> avg(ne, 0.0);
    for (const std::vector<double>& it : iterates)
      for (int e = 0; e < ne; ++e) avg[e] += it[e];
    for (int e = 0; e < ne; ++e) avg[e] /= static_cast<double>(iterates.size());
    const double budget =
        std::max(0.0, eps * std::max(1.0, std::abs(lb)) - (final_ub - lb));
    auto value_at = [&](double theta, FractionalAssignment* out) {
      FractionalAssignment a;
      a.values.resize(ne);
      for (int e = 0; e < ne; ++e)
        a.values[e] = (1.0 - theta) * best.witness.values[e] + theta * avg[e];
      GroupUtilities u = group_utilities(inst, a);
      double v = 0.0;
      for (int k = 0; k < g; ++k) v += terms[k].value(u.values[k]);
      if (out) *out = std::move(a);
      return v;
    };
    double theta_lo = 0.0, theta_hi = 1.0;
    if (value_at(1.0, nullptr) >= lb - budget) {
      theta_lo = 1.0;
    } else {
      for (int step = 0; step < 40; ++step) {
        const double mid = 0.5 * (theta_lo + theta_hi);
        (value_at(mid, nullptr) >= lb - budget ? theta_lo : theta_hi) = mid;
      }
    }
    if (theta_lo > 0.0) {
      FractionalAssignment mixed;
      const double v = value_at(theta_lo, &mixed);
      best.witness = std::move(mixed);
      best.target = group_utilities(inst, best.witness);
      best.objective_value = v;
    }
  }
  return best;
}

}  // namespace fairassign
