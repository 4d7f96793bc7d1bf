#pragma once

#include <utility>
#include <vector>

#include "fairassign/instance.hpp"
#include "fairassign/simplex.hpp"

namespace fairassign {

/// A bundle of >= rows over edge variables, shared by the fairness
/// pipeline (group-utility rows) and the general side-constraint
/// machinery (arbitrary linear rows).
struct SideRows {
  /// One sparse coefficient list per row; pairs are (edge id, coefficient).
  std::vector<std::vector<std::pair<int, double>>> coeffs;
  std::vector<double> rhs;

  int num_rows() const { return static_cast<int>(rhs.size()); }
  /// Largest coefficient magnitude across all rows (0 when empty).
  double max_coeff() const;
};

/// Group-utility rows: for each group k, sum of u_e over edges whose
/// student belongs to k, with rhs U*_k.
SideRows utility_side_rows(const Instance& inst, const GroupUtilities& target);

/// Kinds of rows in an assignment LP, in layout order: one Equal row per
/// student (sum of its edges = 1), one LessEqual row per school
/// (capacity), then the side rows as GreaterEqual.
enum class RowKind { Student, Capacity, Side };

struct RowInfo {
  RowKind kind;
  int index;  // student id / school id / side-row index
};

/// Builds the assignment LP over edge variables y_e in [0,1] with zero
/// objective (pure feasibility).  `capacity_rows` = false omits the
/// school rows (used by the fast rounding mode).  `info`, when given,
/// receives one entry per emitted row.
LpProblem build_assignment_lp(const Instance& inst, const SideRows& side, bool capacity_rows = true,
                              std::vector<RowInfo>* info = nullptr);

}  // namespace fairassign
