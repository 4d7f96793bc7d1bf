#pragma once

#include <string>
#include <vector>

#include "fairassign/gap_round.hpp"
#include "fairassign/instance.hpp"

namespace fairassign {

/// r general linear side constraints sum_e q_e^l y_e >= Q_l over edge
/// variables.  Coefficients may be negative.
struct SideConstraints {
  /// Dense per-row coefficient vectors indexed by edge id.
  std::vector<std::vector<double>> q;
  std::vector<double> rhs;

  int num_rows() const { return static_cast<int>(rhs.size()); }
  double q_max() const;
  void check(const Instance& inst) const;
  SideRows to_side_rows() const;
};

/// Per-student total order over its adjacent schools, most preferred
/// first; each list is a permutation of the student's neighborhood.
struct PreferenceOrders {
  std::vector<std::vector<int>> order_of;  // school ids, most preferred first

  void check(const Instance& inst) const;
  /// Orders by ascending rank on a ranking instance.
  static PreferenceOrders from_ranks(const Instance& inst);
};

/// Per-rank edge counts of a matching (sigma_t = number of students
/// assigned along a rank-t edge).
struct RankSignature {
  std::vector<long long> counts;

  int size() const { return static_cast<int>(counts.size()); }
};

enum class RoundMode { Fast, Frost };

struct ConstrainedRoundResult {
  IntegralAssignment assignment;
  ViolationReport report;
  /// Achieved value minus rhs per constraint row (negative = shortfall).
  std::vector<double> slack;
  bool feasible = true;  // false when the LP relaxation is infeasible
};

/// True iff every constraint row is nonincreasing along every student's
/// preference order.
bool is_monotone(const Instance& inst, const SideConstraints& q, const PreferenceOrders& orders);

/// Theorem 3.1 / Algorithm 4 rounding under general side constraints.
/// Fast mode: constraints off by at most r*q_max additively, total
/// overflow beyond one per school <= 2r.  Frost mode: constraints off by
/// at most (2r+4r^2)*q_max, total overflow <= 4r^2+3r.
ConstrainedRoundResult round_general(const Instance& inst, const SideConstraints& q, RoundMode mode);

/// Monotone strengthening (Theorems 3.4-3.5): requires is_monotone;
/// every constraint holds exactly (>= Q_l - 1e-6), capacity guarantees
/// as in round_general per mode.
ConstrainedRoundResult round_monotone(const Instance& inst, const SideConstraints& q,
                                      const PreferenceOrders& orders, RoundMode mode);

RankSignature signature_of(const Instance& inst, const IntegralAssignment& a);

/// Weak dominance: every prefix sum of sigma >= the matching prefix sum
/// of rho (Eq. (5) arithmetic).
bool dominates(const RankSignature& sigma, const RankSignature& rho);

struct RankSolveResult {
  ConstrainedRoundResult round;
  RankSignature sigma;
  bool lp_fractional = false;  // LP relaxation needed rounding
};

/// Builds the rank-prefix indicator constraints for target signature rho
/// and rounds them monotonically.  `feasible = false` in the result when
/// the LP relaxation admits no solution (a legitimate outcome).
RankSolveResult rank_solve(const Instance& inst, const RankSignature& rho, RoundMode mode);

/// JSON side-constraint format:
/// {"rows":[{"rhs":Q,"coeffs":[{"s":i,"t":j,"v":q}]}]}
SideConstraints read_side_constraints(const std::string& bytes, const Instance& inst);
std::string write_side_constraints(const SideConstraints& q, const Instance& inst);

}  // namespace fairassign
