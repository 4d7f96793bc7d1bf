#pragma once

#include <vector>

#include "fairassign/instance.hpp"

namespace fairassign {

struct IlpOptions {
  long long node_limit = 1'000'000;
  double time_budget_s = 60.0;
  /// Levels of residual-problem reduction allowed (the incumbent
  /// heuristic solves a small exact ILP over the fractional students;
  /// that inner solve may do the same, once).  0 disables it.
  int reduction_depth = 2;
};

struct IlpResult {
  IntegralAssignment assignment;
  long long total_violation = 0;  // sum_j max(0, load_j - C_j), recounted from loads
  bool optimal = false;           // proved, not merely best-found
  long long nodes = 0;            // LPs evaluated
  double lower_bound = 0.0;       // best proved bound on the optimum
};

/// Exact benchmark: minimizes total capacity violation sum_j delta_j
/// over integral assignments meeting every group-utility target, via
/// best-first branch-and-bound on the LP relaxation (delta_j stays
/// continuous; integral y forces integral loads).  Branches on the
/// variable nearest 1/2 (ties: lowest edge id).  `warm_start`, when
/// given, must meet the utility targets and seeds the incumbent;
/// otherwise the all-argmax assignment (which dominates every target
/// simultaneously) is used.  On node/time exhaustion returns the
/// incumbent with optimal = false.  Throws InfeasibleError when the LP
/// relaxation itself is infeasible.
IlpResult ilp_min_violation(const Instance& inst, const GroupUtilities& target,
                            const IlpOptions& opts = {},
                            const IntegralAssignment* warm_start = nullptr);

}  // namespace fairassign
