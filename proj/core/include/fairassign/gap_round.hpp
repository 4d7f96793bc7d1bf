#pragma once

#include <vector>

#include "fairassign/fairness.hpp"
#include "fairassign/instance.hpp"
#include "fairassign/side_rows.hpp"
#include "fairassign/simplex.hpp"

namespace fairassign {

/// The fractional core left after iterated vertex solving and 0/1
/// fixing: a reduced LP whose every variable is strictly fractional,
/// plus the bookkeeping the rounding arguments need.
struct ResidualState {
  LpProblem lp;                    // reduced feasibility LP
  std::vector<RowInfo> row_info;   // metadata per surviving lp row
  std::vector<int> edge_of_var;    // reduced variable -> original edge id
  std::vector<double> frac_value;  // vertex value per reduced variable, in (0,1)
  std::vector<bool> row_tight;     // per surviving lp row

  std::vector<int> fixed_school;          // per student; -1 while fractional
  std::vector<char> student_active;       // S': students still fractional
  std::vector<char> school_active;        // T': schools touched by the support
  std::vector<char> school_tight;         // T^: tight surviving capacity rows
  std::vector<double> residual_capacity;  // surviving capacity rhs per school
  std::vector<double> residual_rhs;       // residual requirement per side row
  std::vector<int> student_degree;        // degrees in the fractional support
  std::vector<int> school_degree;

  int side_row_count = 0;  // r (original side-row count)

  bool empty() const { return edge_of_var.empty(); }
  int num_fractional() const { return static_cast<int>(edge_of_var.size()); }
  /// Sum of excess degrees: degree-2 over S' and tight schools, full
  /// degree over the remaining active schools.  Bounded by 2r.
  long long excess_degree_total() const;
};

struct RoundResult {
  IntegralAssignment assignment;
  ViolationReport report;
  GroupUtilities utilities;
};

/// Iterates vertex solve -> snap-and-fix integral variables until the
/// support is fully fractional, starting from an arbitrary LP whose
/// rows are described by `row_info` and whose variables map to edges
/// via `edge_of_var`.  `presolved`, when given, must hold this LP
/// already solved to optimality and is used for the first iterate.
/// Checks the residual invariants (degrees, excess-degree bound) and
/// throws on violation.
ResidualState iterate_on_lp(const Instance& inst, LpProblem lp, std::vector<RowInfo> row_info,
                            std::vector<int> edge_of_var, int side_row_count,
                            SimplexSolver* presolved = nullptr);

/// Builds the assignment LP with the given side rows and iterates it to
/// its fractional core.
ResidualState iterate_to_fractional_core(const Instance& inst, const SideRows& side,
                                         bool capacity_rows = true,
                                         SimplexSolver* presolved = nullptr);

/// Finishes a fractional core by assigning every remaining student to
/// its argmax-utility supported school (ties: lowest school id).
RoundResult gap_round_core(const Instance& inst, const ResidualState& state);

/// Full Algorithm-1 pipeline from a fairness target.
RoundResult gap_round(const Instance& inst, const FairTarget& target);

}  // namespace fairassign
