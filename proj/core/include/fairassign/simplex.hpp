#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fairassign {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };
enum class Sense { Maximize, Minimize };

struct LpRow {
  std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
};

/// Bounded-variable linear program.  Variables carry [lo, hi] bounds
/// (possibly infinite on one side); rows are sparse.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;  // dense, size num_vars
  double objective_constant = 0.0;
  Sense sense = Sense::Maximize;
  std::vector<LpRow> rows;

  int add_variable(double lo, double hi, double obj = 0.0);
  void add_row(Relation rel, double rhs, std::vector<std::pair<int, double>> coeffs);
  /// Throws ValidationError on malformed bounds or bad variable references.
  void check() const;
};

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper };

enum class SolveStatus { Optimal, Infeasible, Unbounded };

/// A basic optimal solution.  Nonbasic variables sit exactly on a bound;
/// the tight rows plus tight bounds have full rank, which is what the
/// rounding arguments count against the fractional support.
struct VertexSolution {
  std::vector<double> values;
  double objective = 0.0;
  std::vector<VarStatus> var_status;
  std::vector<bool> row_tight;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  VertexSolution solution;  // valid only when status == Optimal
};

enum class Pricing { Auto, Bland };

/// Revised primal simplex over bounded variables with a dense explicit
/// basis inverse.  Supports warm restarts after bound changes, row
/// additions and variable additions; every modification keeps the basis
/// and re-solving starts from it.
///
/// Pricing is Dantzig by default with an automatic switch to Bland's
/// rule after a run of degenerate pivots, which restores the
/// anti-cycling guarantee; Pricing::Bland forces Bland throughout.
class SimplexSolver {
 public:
  void load(const LpProblem& p);

  SolveStatus solve();

  /// Adds a row; its slack enters the basis.  O(m * nnz + m).
  int add_row(Relation rel, double rhs, const std::vector<std::pair<int, double>>& coeffs);
  /// Adds a structural variable, nonbasic at the bound nearest zero.
  int add_variable(double lo, double hi, double obj,
                   const std::vector<std::pair<int, double>>& column);
  void set_objective(const std::vector<double>& obj, Sense sense, double constant = 0.0);
  void set_objective_coeff(int var, double coeff);
  void set_bounds(int var, double lo, double hi);
  void set_row_rhs(int row, double rhs);

  double value(int var) const;
  std::vector<double> values() const;  // structural variables only
  double objective_value() const;
  VertexSolution extract() const;

  int num_structural() const { return n_struct_; }
  int num_rows() const { return m_; }
  long long pivot_count() const { return pivots_; }

  void set_pricing(Pricing p) { pricing_ = p; }

  /// Installs a starting basis before solving: `basic_in_row[r]` names
  /// the structural variable to make basic in row r, or -1 to keep the
  /// row's slack.  Every other variable moves to its nearest finite
  /// bound.  The start need not be feasible — phase 1 repairs any
  /// residual — but a feasible crash makes phase 1 a no-op.
  void crash_basis(const std::vector<int>& basic_in_row);

 private:
  struct RatioResult {
    double step = 0.0;
    int leaving_pos = -1;  // basis position, -1 for bound flip
    bool to_upper = false; // bound the leaving variable exits at
    bool bound_flip = false;
    bool unbounded = false;
  };

  enum class PhaseResult { Done, Infeasible, Unbounded, Stalled };

  void ftran(int var, std::vector<double>& w) const;
  std::vector<double> basis_prices(const std::vector<double>& cost_of_basic) const;
  RatioResult ratio_test(int entering, int dir, const std::vector<double>& w,
                         bool phase_one) const;
  void apply_step(int entering, int dir, const std::vector<double>& w, const RatioResult& rr);
  void recompute_values();
  void refactorize();
  PhaseResult phase_one();
  PhaseResult phase_two();
  void perturb_bounds();
  void restore_bounds();
  double infeasibility(std::vector<double>* gamma) const;
  double internal_cost(int var) const;
  void grow_binv(int new_m);

  double& binv(int col, int i) { return binv_[static_cast<size_t>(col) * stride_ + i]; }
  double binv(int col, int i) const { return binv_[static_cast<size_t>(col) * stride_ + i]; }

  int n_struct_ = 0;
  int m_ = 0;       // rows == logical variables
  int n_total_ = 0; // n_struct_ + m_
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, obj_, val_;
  std::vector<double> rhs_;
  std::vector<Relation> rel_;
  std::vector<VarStatus> status_;
  std::vector<int> basis_;        // variable basic in each row position
  std::vector<int> basis_pos_;    // inverse of basis_, -1 when nonbasic
  std::vector<int> struct_var_;   // user structural index -> internal index
  std::vector<int> slack_of_row_; // internal index of each row's slack
  std::vector<double> lo_exact_, hi_exact_;  // bounds before anti-degeneracy perturbation
  bool perturbed_ = false;
  std::uint64_t perturb_round_ = 0;
  std::vector<double> binv_; // column-major, stride_ >= m_
  size_t stride_ = 0;
  Sense sense_ = Sense::Maximize;
  double obj_const_ = 0.0;
  Pricing pricing_ = Pricing::Auto;
  long long pivots_ = 0;
  long long iter_cap_ = 0;
  int degenerate_run_ = 0;
  bool loaded_ = false;
};

/// Solves cold and returns a basic optimal solution, or the
/// Infeasible/Unbounded state.  Deterministic.
SolveResult solve_vertex(const LpProblem& p);

/// Returns a copy of `p` with `var` substituted at `value`: the variable
/// is removed, row right-hand sides and the objective constant absorb
/// its contribution.  Variables above `var` shift down by one.
LpProblem fix_variable(const LpProblem& p, int var, double value);

/// Batch form; `fixes` uses indices of `p` (applied simultaneously).
/// Rows whose coefficients all vanish and whose residual rhs is
/// satisfied are dropped; `kept_rows`, when given, receives the
/// surviving original row indices in order.
LpProblem fix_variables(const LpProblem& p, std::vector<std::pair<int, double>> fixes,
                        std::vector<int>* kept_rows = nullptr);

/// Debug dump in LP text format for external cross-checking.
std::string dump_lp(const LpProblem& p);

}  // namespace fairassign
