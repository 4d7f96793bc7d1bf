#pragma once

#include <utility>
#include <vector>

#include "fairassign/gap_round.hpp"
#include "fairassign/instance.hpp"
#include "fairassign/side_rows.hpp"

namespace fairassign {

/// One path or cycle of the processed residual graph.  Students appear
/// in walk order; student t's two incident edges are even_edge[t]
/// (fraction alpha) and odd_edge[t] (fraction 1 - alpha), both indices
/// into Instance::edges.
struct FrostComponent {
  bool cycle = false;
  std::vector<int> students;
  std::vector<int> even_edge;
  std::vector<int> odd_edge;
  double alpha = 0.0;
};

/// Output of the graph-modification step: a degree-<=2 system of paths
/// and cycles, the students it force-assigned along the way, and the
/// capacity bookkeeping of the modification (counted with the proof's
/// accounting, so the 4g budget can be asserted).
struct PathSystem {
  std::vector<FrostComponent> components;
  std::vector<int> fixed_edge;            // per student, -1 unless forced here
  std::vector<long long> capacity_added;  // per school
  std::vector<char> split_school;         // schools broken into unit leaves
  long long total_capacity_added() const;
};

/// Piecewise-constant cake-frosting instance: `cells` equal cells over
/// [0,1), one density row per player, and the target fraction alpha.
struct FrostingProblem {
  int cells = 0;
  std::vector<std::vector<double>> density;  // [player][cell]
  double alpha = 0.0;
};

/// Union of disjoint, sorted, half-open intervals within [0,1].
struct Frosting {
  std::vector<std::pair<double, double>> intervals;

  double measure() const;
  /// Integral of a piecewise-constant density over the union.
  double integral(const std::vector<double>& density) const;
};

/// Graph modification: students of degree > 2 are fixed to their best
/// supported school (+1 capacity), schools whose rows do not force the
/// alternation are split into unit-capacity leaves, and the survivors
/// are walked into alternating path/cycle components.  Total capacity
/// added is at most 4r for r side rows (asserted).
PathSystem build_path_system(const Instance& inst, const ResidualState& state);
/// `by_utility` = false resolves the "best supported school" choices as
/// lowest school id instead of argmax utility (general-constraint mode).
PathSystem build_path_system(const Instance& inst, const ResidualState& state, bool by_utility);

/// Breaks every cycle by fixing its lowest-id student to its best
/// supported school (+1 capacity each); components become paths that
/// begin and end at schools.
PathSystem cycles_to_paths(const Instance& inst, PathSystem ps);
PathSystem cycles_to_paths(const Instance& inst, PathSystem ps, bool by_utility);

/// The component LP over z_C in [0,1]: for every side row l,
/// sum_C z_C u_C^even(l) + (1-z_C) u_C^odd(l) >= residual_target[l],
/// with u_C^even(l) the sum of row l's coefficients over the even edges
/// of C (odd likewise).  Returns a vertex solution; at most `side rows`
/// entries fractional (asserted).  `preference`, when given, selects
/// among the (typically many) vertices by maximizing preference . z;
/// the pipeline uses it to steer components away from scarce schools.
std::vector<double> solve_component_lp(const SideRows& side, const Instance& inst,
                                       const PathSystem& ps,
                                       const std::vector<double>& residual_target,
                                       const std::vector<double>* preference = nullptr);

/// Constructive Cake Frosting Lemma: returns X with at most
/// 2 g_eff - 1 intervals (g_eff = players with a nonzero density)
/// satisfying integral(X, f_l) = alpha * integral([0,1], f_l) for all l
/// within 1e-6.  Searches interval counts k = 1, 2, ... and, per k,
/// lexicographic placements of the 2k ordered endpoints into cells;
/// each placement is a linear feasibility problem in the endpoint
/// offsets.  `max_intervals` > 0 overrides the 2 g_eff - 1 cap.
/// Throws std::logic_error when the search is exhausted.
Frosting perfect_frosting(const FrostingProblem& p, int max_intervals = 0);

/// Rounds one fractional component with its frosting: cells inside X
/// take the even edge, cells outside take the odd edge, boundary cells
/// take the higher-utility edge.  Writes into school_of.
void frost_round_component(const Instance& inst, const FrostComponent& comp, const Frosting& x,
                           std::vector<int>& school_of);
void frost_round_component(const Instance& inst, const FrostComponent& comp, const Frosting& x,
                           std::vector<int>& school_of, bool by_utility);

/// Shared Algorithm-3 engine over arbitrary side rows: builds the path
/// system from the fractional core, steers the component LP away from
/// scarce schools, frosts the fractional components and returns the
/// completed assignment.  `by_utility` selects the rule of the forced
/// choices (argmax utility, or lowest school id for general rows).
IntegralAssignment frost_assign(const Instance& inst, const SideRows& side,
                                const ResidualState& state, bool by_utility);

/// Full Theorem-2.2 pipeline on a precomputed fractional core.
RoundResult frost_pipeline_core(const Instance& inst, const FairTarget& target,
                                const ResidualState& state);

/// iterate_to_fractional_core + frost_pipeline_core.  Output satisfies
/// U' >= U* - 1e-6 and total overflow <= 4g^2 + 3g (both checked).
RoundResult frost_pipeline(const Instance& inst, const FairTarget& target);

}  // namespace fairassign
