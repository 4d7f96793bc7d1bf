#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairassign {

/// Raised when an input file or structure violates an invariant.  The
/// message names the offending field.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a required program (the assignment polytope, LP1, ...)
/// has no feasible point.  Distinct from ValidationError: the input is
/// well formed, the mathematical program simply has no solution.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

struct Edge {
  int student = -1;
  int school = -1;
  double utility = 0.0;
  /// Positive rank (1 = most preferred) for ranking instances, 0 otherwise.
  int rank = 0;
};

/// A bipartite student/school assignment instance with capacities,
/// per-edge utilities and possibly overlapping demographic groups.
/// Immutable after construction; validate() is called by all loaders.
struct Instance {
  int n_students = 0;
  int n_schools = 0;
  std::vector<long long> capacities;     // per school, nonnegative integers
  std::vector<Edge> edges;
  std::vector<std::vector<int>> groups;  // sorted student-id lists
  bool has_ranks = false;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_groups() const { return static_cast<int>(groups.size()); }

  /// Edge indices incident to each student / school (built by validate()).
  const std::vector<std::vector<int>>& student_edges() const { return student_edges_; }
  const std::vector<std::vector<int>>& school_edges() const { return school_edges_; }
  /// Group ids containing each student.
  const std::vector<std::vector<int>>& groups_of_student() const { return groups_of_; }

  /// Checks all structural invariants and builds the adjacency indexes.
  /// Throws ValidationError naming the offending field.
  void validate();

 private:
  std::vector<std::vector<int>> student_edges_;
  std::vector<std::vector<int>> school_edges_;
  std::vector<std::vector<int>> groups_of_;
};

/// Per-edge fractional values y_e in [0,1].
struct FractionalAssignment {
  std::vector<double> values;
  /// When set, per-school capacity sums are allowed to exceed C_j.
  bool relaxed = false;
};

/// One school per student; loads derived exactly from school_of.
struct IntegralAssignment {
  std::vector<int> school_of;

  std::vector<long long> loads(const Instance& inst) const;
};

/// Length-g vector of group utilities U_k.
struct GroupUtilities {
  std::vector<double> values;
};

/// Per-school capacity overflow of an integral assignment.
struct ViolationReport {
  std::vector<long long> overflow;             // max(0, load_j - C_j)
  std::vector<long long> overflow_beyond_one;  // max(0, load_j - C_j - 1)
  long long total_overflow = 0;
  long long total_overflow_beyond_one = 0;
};

/// Tolerance used throughout for integrality / tightness detection.
inline constexpr double kFeasTol = 1e-7;

GroupUtilities group_utilities(const Instance& inst, const FractionalAssignment& a);
GroupUtilities group_utilities(const Instance& inst, const IntegralAssignment& a);

/// Throws ValidationError if the fractional assignment is not feasible:
/// per-student sums must equal 1 within 1e-7 and, unless `relaxed`,
/// per-school sums must respect capacities within 1e-7.
void check_feasible(const Instance& inst, const FractionalAssignment& a);

/// Checks that every student is assigned along an existing edge.
void check_assignment(const Instance& inst, const IntegralAssignment& a);

ViolationReport violation_report(const Instance& inst, const IntegralAssignment& a);

Instance read_instance(const std::string& bytes);
std::string write_instance(const Instance& inst);

IntegralAssignment read_assignment(const std::string& bytes, const Instance& inst);
std::string write_assignment(const IntegralAssignment& a);

}  // namespace fairassign
