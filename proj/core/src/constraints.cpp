#include "fairassign/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "fairassign/frosting.hpp"

namespace fairassign {

using nlohmann::json;

namespace {

/// The "arbitrary" choice of the rounding steps, made deterministic:
/// lowest school id, or argmax utility with lowest-school ties when
/// `by_utility` (the monotone variants run on a proxy instance whose
/// utilities encode the preference orders, so argmax = most preferred).
int choose_edge(const Instance& inst, const std::vector<int>& edges, bool by_utility) {
  int best = edges.at(0);
  for (int e : edges) {
    const Edge& a = inst.edges[best];
    const Edge& b = inst.edges[e];
    const bool better = by_utility ? (b.utility > a.utility ||
                                      (b.utility == a.utility && b.school < a.school))
                                   : b.school < a.school;
    if (better) best = e;
  }
  return best;
}

std::vector<double> constraint_slack(const SideConstraints& q, const Instance& inst,
                                     const IntegralAssignment& a) {
  std::vector<double> slack(q.num_rows(), 0.0);
  for (int l = 0; l < q.num_rows(); ++l) {
    double total = 0.0;
    for (int e = 0; e < inst.num_edges(); ++e)
      if (a.school_of[inst.edges[e].student] == inst.edges[e].school) total += q.q[l][e];
    slack[l] = total - q.rhs[l];
  }
  return slack;
}

/// Fast rounding: iterate to the fractional core with capacities, then
/// rewrite the surviving LP without capacity rows and iterate again;
/// the <= r students left get a supported school by the choice rule.
IntegralAssignment fast_assign(const Instance& inst, const SideConstraints& q, bool by_utility) {
  const SideRows side = q.to_side_rows();
  const int r = q.num_rows();
  const ResidualState first = iterate_to_fractional_core(inst, side);
  IntegralAssignment a;
  a.school_of = first.fixed_school;
  if (first.empty()) return a;

  const int nv = first.num_fractional();
  LpProblem lp;
  std::vector<RowInfo> info;
  for (int v = 0; v < nv; ++v) lp.add_variable(0.0, 1.0, 0.0);
  std::vector<std::vector<int>> vars_of_student(inst.n_students);
  for (int v = 0; v < nv; ++v)
    vars_of_student[inst.edges[first.edge_of_var[v]].student].push_back(v);
  for (int i = 0; i < inst.n_students; ++i) {
    if (vars_of_student[i].empty()) continue;
    std::vector<std::pair<int, double>> row;
    for (int v : vars_of_student[i]) row.push_back({v, 1.0});
    lp.add_row(Relation::Equal, 1.0, std::move(row));
    info.push_back({RowKind::Student, i});
  }
  for (int l = 0; l < r; ++l) {
    std::vector<std::pair<int, double>> row;
    for (int v = 0; v < nv; ++v)
      if (q.q[l][first.edge_of_var[v]] != 0.0) row.push_back({v, q.q[l][first.edge_of_var[v]]});
    lp.add_row(Relation::GreaterEqual, first.residual_rhs[l], std::move(row));
    info.push_back({RowKind::Side, l});
  }
  const ResidualState second =
      iterate_on_lp(inst, std::move(lp), std::move(info), first.edge_of_var, r);

  std::vector<std::vector<int>> support(inst.n_students);
  for (int e : second.edge_of_var) support[inst.edges[e].student].push_back(e);
  int remaining = 0;
  for (int i = 0; i < inst.n_students; ++i) {
    if (a.school_of[i] >= 0) continue;
    if (second.fixed_school[i] >= 0) {
      a.school_of[i] = second.fixed_school[i];
      continue;
    }
    if (support[i].empty()) throw std::logic_error("fast_assign: unassigned isolated student");
    ++remaining;
    a.school_of[i] = inst.edges[choose_edge(inst, support[i], by_utility)].school;
  }
  if (remaining > r)
    throw std::logic_error("fast_assign: more than r students left after the rewrite");
  return a;
}

/// Shared tail of the general and monotone variants: rounds, then
/// enforces the mode's constraint and capacity guarantees.
ConstrainedRoundResult round_checked(const Instance& inst, const SideConstraints& q, RoundMode mode,
                                     bool by_utility, double slack_allowance) {
  const int r = q.num_rows();
  ConstrainedRoundResult out;
  try {
    if (mode == RoundMode::Fast) {
      out.assignment = fast_assign(inst, q, by_utility);
    } else {
      const SideRows side = q.to_side_rows();
      out.assignment = frost_assign(inst, side, iterate_to_fractional_core(inst, side), by_utility);
    }
  } catch (const InfeasibleError&) {
    out.feasible = false;
    return out;
  }
  check_assignment(inst, out.assignment);
  out.report = violation_report(inst, out.assignment);
  out.slack = constraint_slack(q, inst, out.assignment);
  for (int l = 0; l < r; ++l)
    if (out.slack[l] < -slack_allowance)
      throw std::logic_error("round: constraint shortfall beyond the mode's guarantee");
  if (mode == RoundMode::Fast) {
    if (out.report.total_overflow_beyond_one > 2LL * r)
      throw std::logic_error("round: beyond-one overflow bound 2r exceeded");
  } else {
    if (out.report.total_overflow > 4LL * r * r + 3LL * r)
      throw std::logic_error("round: overflow bound 4r^2+3r exceeded");
  }
  return out;
}

}  // namespace

double SideConstraints::q_max() const {
  double qm = 0.0;
  for (const auto& row : q)
    for (double c : row) qm = std::max(qm, std::abs(c));
  return qm;
}

void SideConstraints::check(const Instance& inst) const {
  if (q.size() != rhs.size())
    throw ValidationError("SideConstraints: rows and rhs must have equal length");
  for (const auto& row : q) {
    if (row.size() != static_cast<size_t>(inst.num_edges()))
      throw ValidationError("SideConstraints: row length must equal edge count");
    for (double c : row)
      if (!std::isfinite(c)) throw ValidationError("SideConstraints: non-finite coefficient");
  }
}

SideRows SideConstraints::to_side_rows() const {
  SideRows side;
  side.rhs = rhs;
  side.coeffs.resize(q.size());
  for (size_t l = 0; l < q.size(); ++l)
    for (size_t e = 0; e < q[l].size(); ++e)
      if (q[l][e] != 0.0) side.coeffs[l].push_back({static_cast<int>(e), q[l][e]});
  return side;
}

void PreferenceOrders::check(const Instance& inst) const {
  if (order_of.size() != static_cast<size_t>(inst.n_students))
    throw ValidationError("PreferenceOrders: one order per student required");
  for (int i = 0; i < inst.n_students; ++i) {
    std::set<int> nbr;
    for (int e : inst.student_edges()[i]) nbr.insert(inst.edges[e].school);
    if (order_of[i].size() != nbr.size() ||
        std::set<int>(order_of[i].begin(), order_of[i].end()) != nbr)
      throw ValidationError("PreferenceOrders: order of student " + std::to_string(i) +
                            " is not a permutation of its neighborhood");
  }
}

PreferenceOrders PreferenceOrders::from_ranks(const Instance& inst) {
  if (!inst.has_ranks) throw ValidationError("PreferenceOrders::from_ranks: instance has no ranks");
  PreferenceOrders orders;
  orders.order_of.resize(inst.n_students);
  for (int i = 0; i < inst.n_students; ++i) {
    std::vector<std::pair<int, int>> by_rank;  // (rank, school)
    for (int e : inst.student_edges()[i]) by_rank.push_back({inst.edges[e].rank, inst.edges[e].school});
    std::sort(by_rank.begin(), by_rank.end());
    for (auto [rank, school] : by_rank) orders.order_of[i].push_back(school);
  }
  return orders;
}

bool is_monotone(const Instance& inst, const SideConstraints& q, const PreferenceOrders& orders) {
  q.check(inst);
  orders.check(inst);
  // Edge id lookup per (student, school).
  std::vector<std::vector<int>> edge_at(inst.n_students, std::vector<int>(inst.n_schools, -1));
  for (int e = 0; e < inst.num_edges(); ++e)
    edge_at[inst.edges[e].student][inst.edges[e].school] = e;
  for (int l = 0; l < q.num_rows(); ++l)
    for (int i = 0; i < inst.n_students; ++i)
      for (size_t pos = 0; pos + 1 < orders.order_of[i].size(); ++pos) {
        const int ea = edge_at[i][orders.order_of[i][pos]];
        const int eb = edge_at[i][orders.order_of[i][pos + 1]];
        if (q.q[l][ea] < q.q[l][eb] - 1e-12) return false;
      }
  return true;
}

ConstrainedRoundResult round_general(const Instance& inst, const SideConstraints& q,
                                     RoundMode mode) {
  q.check(inst);
  const double allowance =
      (mode == RoundMode::Fast ? q.num_rows()
                               : 2.0 * q.num_rows() + 4.0 * q.num_rows() * q.num_rows()) *
          q.q_max() +
      1e-6;
  return round_checked(inst, q, mode, false, allowance);
}

ConstrainedRoundResult round_monotone(const Instance& inst, const SideConstraints& q,
                                      const PreferenceOrders& orders, RoundMode mode) {
  q.check(inst);
  orders.check(inst);
  if (!is_monotone(inst, q, orders))
    throw ValidationError("round_monotone: constraints are not monotone under the given orders");
  // Proxy instance whose utilities rank each student's schools by the
  // preference order; argmax utility then means "most preferred", which
  // is what preserves the constraints exactly.
  Instance proxy = inst;
  std::vector<std::vector<int>> edge_at(inst.n_students, std::vector<int>(inst.n_schools, -1));
  for (int e = 0; e < inst.num_edges(); ++e)
    edge_at[inst.edges[e].student][inst.edges[e].school] = e;
  for (int i = 0; i < inst.n_students; ++i)
    for (size_t pos = 0; pos < orders.order_of[i].size(); ++pos)
      proxy.edges[edge_at[i][orders.order_of[i][pos]]].utility =
          static_cast<double>(orders.order_of[i].size() - pos);
  proxy.validate();
  ConstrainedRoundResult out = round_checked(proxy, q, mode, true, 1e-6);
  return out;
}

RankSolveResult rank_solve(const Instance& inst, const RankSignature& rho, RoundMode mode) {
  if (!inst.has_ranks) throw ValidationError("rank_solve: instance has no ranks");
  const int r = rho.size();
  if (r <= 0) throw ValidationError("rank_solve: empty target signature");
  long long total = 0;
  for (long long c : rho.counts) {
    if (c < 0) throw ValidationError("rank_solve: negative signature entry");
    total += c;
  }
  if (total > inst.n_students)
    throw ValidationError("rank_solve: signature entries sum beyond the student count");

  // Prefix-indicator rows: row t counts edges of rank <= t+1 and must
  // reach the matching prefix sum of rho (Eq. (5) as covering rows).
  SideConstraints q;
  long long prefix = 0;
  for (int t = 0; t < r; ++t) {
    prefix += rho.counts[t];
    q.rhs.push_back(static_cast<double>(prefix));
    std::vector<double> row(inst.num_edges(), 0.0);
    for (int e = 0; e < inst.num_edges(); ++e)
      if (inst.edges[e].rank <= t + 1) row[e] = 1.0;
    q.q.push_back(std::move(row));
  }
  const PreferenceOrders orders = PreferenceOrders::from_ranks(inst);
  if (!is_monotone(inst, q, orders))
    throw std::logic_error("rank_solve: prefix rows are not monotone under rank order");

  RankSolveResult out;
  // The paper's protocol distinguishes instances whose LP vertex is
  // already integral; detect that on the unreduced LP.
  LpProblem lp = build_assignment_lp(inst, q.to_side_rows());
  SolveResult first = solve_vertex(lp);
  if (first.status != SolveStatus::Optimal) {
    out.round.feasible = false;
    return out;
  }
  for (double v : first.solution.values)
    if (v > kFeasTol && v < 1.0 - kFeasTol) {
      out.lp_fractional = true;
      break;
    }

  out.round = round_monotone(inst, q, orders, mode);
  out.sigma = signature_of(inst, out.round.assignment);
  if (!dominates(out.sigma, rho))
    throw std::logic_error("rank_solve: output signature fails to dominate the target");
  return out;
}

RankSignature signature_of(const Instance& inst, const IntegralAssignment& a) {
  if (!inst.has_ranks) throw ValidationError("signature_of: instance has no ranks");
  check_assignment(inst, a);
  int max_rank = 0;
  for (const Edge& e : inst.edges) max_rank = std::max(max_rank, e.rank);
  RankSignature sig;
  sig.counts.assign(max_rank, 0);
  for (const Edge& e : inst.edges)
    if (a.school_of[e.student] == e.school) ++sig.counts[e.rank - 1];
  return sig;
}

bool dominates(const RankSignature& sigma, const RankSignature& rho) {
  long long ps = 0, pr = 0;
  const int len = std::max(sigma.size(), rho.size());
  for (int t = 0; t < len; ++t) {
    ps += t < sigma.size() ? sigma.counts[t] : 0;
    pr += t < rho.size() ? rho.counts[t] : 0;
    if (ps < pr) return false;
  }
  return true;
}

SideConstraints read_side_constraints(const std::string& bytes, const Instance& inst) {
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("rows") || !j["rows"].is_array())
    throw ValidationError("side constraints: expected object with 'rows' array");
  std::vector<std::vector<int>> edge_at(inst.n_students, std::vector<int>(inst.n_schools, -1));
  for (int e = 0; e < inst.num_edges(); ++e)
    edge_at[inst.edges[e].student][inst.edges[e].school] = e;
  SideConstraints q;
  for (const auto& jr : j["rows"]) {
    if (!jr.is_object() || !jr.contains("rhs") || !jr.contains("coeffs"))
      throw ValidationError("side constraints: row needs 'rhs' and 'coeffs'");
    q.rhs.push_back(jr["rhs"].get<double>());
    std::vector<double> row(inst.num_edges(), 0.0);
    for (const auto& jc : jr["coeffs"]) {
      const int s = jc.at("s").get<int>();
      const int t = jc.at("t").get<int>();
      if (s < 0 || s >= inst.n_students || t < 0 || t >= inst.n_schools || edge_at[s][t] < 0)
        throw ValidationError("side constraints: coefficient on a nonexistent edge");
      row[edge_at[s][t]] = jc.at("v").get<double>();
    }
    q.q.push_back(std::move(row));
  }
  q.check(inst);
  return q;
}

std::string write_side_constraints(const SideConstraints& q, const Instance& inst) {
  q.check(inst);
  json rows = json::array();
  for (int l = 0; l < q.num_rows(); ++l) {
    json coeffs = json::array();
    for (int e = 0; e < inst.num_edges(); ++e)
      if (q.q[l][e] != 0.0)
        coeffs.push_back({{"s", inst.edges[e].student}, {"t", inst.edges[e].school}, {"v", q.q[l][e]}});
    rows.push_back({{"rhs", q.rhs[l]}, {"coeffs", std::move(coeffs)}});
  }
  return json{{"rows", std::move(rows)}}.dump();
}

}  // namespace fairassign
