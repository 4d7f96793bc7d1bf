#pragma once

#include <string>
#include <vector>

#include "fairassign/instance.hpp"
#include "fairassign/side_rows.hpp"
#include "fairassign/simplex.hpp"

namespace fairassign {

enum class ObjectiveKind { NashWelfare, MaxMin, CES, LinearWelfare };

/// Separable concave objective sum_k f(U_k).
struct Objective {
  ObjectiveKind kind = ObjectiveKind::NashWelfare;
  /// Per-group weights a_k >= 0; empty means all ones.
  std::vector<double> weights;
  /// CES exponent r in (0,1].
  double exponent = 1.0;

  static Objective nash() { return {ObjectiveKind::NashWelfare, {}, 1.0}; }
  static Objective maxmin() { return {ObjectiveKind::MaxMin, {}, 1.0}; }
  static Objective ces(double r, std::vector<double> w = {}) {
    return {ObjectiveKind::CES, std::move(w), r};
  }
  static Objective welfare(std::vector<double> w = {}) {
    return {ObjectiveKind::LinearWelfare, std::move(w), 1.0};
  }

  void check(int num_groups) const;
};

/// Output of the concave maximization: target utilities with a
/// fractional witness achieving them.
struct FairTarget {
  GroupUtilities target;           // U*_k, exact utilities of the witness
  FractionalAssignment witness;    // feasible in the assignment polytope
  double objective_value = 0.0;    // sum_k f(U*_k)
  int cut_count = 0;               // cutting planes used (0 for exact LPs)
};

/// Maximizes sum_k f(U_k) over the fractional assignment polytope.
/// MaxMin and LinearWelfare are single exact LP solves; NashWelfare and
/// CES run a Kelley cutting-plane loop to relative tolerance `eps`
/// (iteration cap 500).  Throws InfeasibleError when the polytope is
/// empty and ValidationError when NashWelfare/CES meet a group whose
/// maximum achievable utility is zero.
FairTarget maximize_fairness(const Instance& inst, const Objective& obj, double eps = 1e-6);

/// Ratios U_k / U^solo_k where U^solo_k is the best utility group k
/// could get with the whole instance to itself (g LinearWelfare solves).
/// A group with U^solo_k = 0 reports ratio 1.
std::vector<double> proportionality_check(const Instance& inst, const GroupUtilities& u);

/// (LP1): feasibility LP over y in [0,1]^E with per-student equality
/// rows, per-school capacity rows and one utility row >= U*_k per group.
LpProblem build_lp1(const Instance& inst, const GroupUtilities& target);

}  // namespace fairassign
