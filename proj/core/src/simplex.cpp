#include "fairassign/simplex.hpp"

#include <cstdio>
#include <cstdlib>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fairassign/instance.hpp"

namespace fairassign {

namespace {
constexpr double kPivTol = 1e-9;   // pivot / reduced-cost eligibility
constexpr double kZeroTol = 1e-11; // treat as exact zero
constexpr double kFeasEps = 1e-7;  // feasibility contract
constexpr int kBlandTrigger = 60;  // degenerate pivots before switching rule
constexpr int kPerturbTrigger = 100;  // degenerate pivots before bound perturbation
}  // namespace

int LpProblem::add_variable(double lo, double hi, double obj) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(obj);
  return num_vars++;
}

void LpProblem::add_row(Relation rel, double rhs, std::vector<std::pair<int, double>> coeffs) {
  rows.push_back(LpRow{std::move(coeffs), rel, rhs});
}

void LpProblem::check() const {
  if (static_cast<int>(lower.size()) != num_vars || static_cast<int>(upper.size()) != num_vars ||
      static_cast<int>(objective.size()) != num_vars)
    throw ValidationError("LpProblem: bound/objective arrays must match num_vars");
  for (int v = 0; v < num_vars; ++v) {
    if (lower[v] > upper[v])
      throw ValidationError("LpProblem: lower > upper for variable " + std::to_string(v));
    if (std::isnan(lower[v]) || std::isnan(upper[v]) || !std::isfinite(objective[v]))
      throw ValidationError("LpProblem: non-finite data for variable " + std::to_string(v));
  }
  for (size_t r = 0; r < rows.size(); ++r)
    for (auto [v, c] : rows[r].coeffs)
      if (v < 0 || v >= num_vars || !std::isfinite(c))
        throw ValidationError("LpProblem: bad coefficient in row " + std::to_string(r));
}

void SimplexSolver::grow_binv(int new_m) {
  if (static_cast<size_t>(new_m) <= stride_) return;
  size_t new_stride = std::max<size_t>(64, std::max<size_t>(2 * stride_, new_m));
  std::vector<double> nb(new_stride * new_stride, 0.0);
  if (!binv_.empty())
    for (int c = 0; c < m_; ++c)
      std::copy(binv_.begin() + c * stride_, binv_.begin() + c * stride_ + m_,
                nb.begin() + c * new_stride);
  binv_ = std::move(nb);
  stride_ = new_stride;
}

void SimplexSolver::load(const LpProblem& p) {
  p.check();
  n_struct_ = p.num_vars;
  m_ = static_cast<int>(p.rows.size());
  n_total_ = 0;
  cols_.clear();
  lo_.clear();
  hi_.clear();
  obj_.clear();
  val_.clear();
  rhs_.clear();
  rel_.clear();
  status_.clear();
  basis_.clear();
  basis_pos_.clear();
  struct_var_.clear();
  sense_ = p.sense;
  obj_const_ = p.objective_constant;
  pivots_ = 0;
  degenerate_run_ = 0;

  auto new_var = [&](double lo, double hi, double obj) {
    cols_.emplace_back();
    lo_.push_back(lo);
    hi_.push_back(hi);
    obj_.push_back(obj);
    val_.push_back(0.0);
    status_.push_back(VarStatus::AtLower);
    basis_pos_.push_back(-1);
    return n_total_++;
  };

  for (int v = 0; v < n_struct_; ++v) {
    int iv = new_var(p.lower[v], p.upper[v], p.objective[v]);
    struct_var_.push_back(iv);
    if (p.lower[v] > -kInf && (p.upper[v] >= kInf || std::abs(p.lower[v]) <= std::abs(p.upper[v]))) {
      status_[iv] = VarStatus::AtLower;
      val_[iv] = p.lower[v];
    } else if (p.upper[v] < kInf) {
      status_[iv] = VarStatus::AtUpper;
      val_[iv] = p.upper[v];
    } else {
      throw ValidationError("SimplexSolver: free variables are not supported");
    }
  }
  for (int r = 0; r < m_; ++r) {
    const LpRow& row = p.rows[r];
    for (auto [v, c] : row.coeffs)
      if (c != 0.0) cols_[struct_var_[v]].push_back({r, c});
    rhs_.push_back(row.rhs);
    rel_.push_back(row.rel);
  }
  // One slack per row; all start basic, so B = I.
  stride_ = 0;
  binv_.clear();
  grow_binv(m_);
  for (int r = 0; r < m_; ++r) {
    double slo = 0.0, shi = 0.0;
    if (rel_[r] == Relation::LessEqual) shi = kInf;
    if (rel_[r] == Relation::GreaterEqual) slo = -kInf;
    int sv = new_var(slo, shi, 0.0);
    cols_[sv].push_back({r, 1.0});
    slack_of_row_.push_back(sv);
    status_[sv] = VarStatus::Basic;
    basis_.push_back(sv);
    basis_pos_[sv] = r;
    binv(r, r) = 1.0;
  }
  slack_of_row_.resize(m_);
  loaded_ = true;
  recompute_values();
}

double SimplexSolver::internal_cost(int var) const {
  return sense_ == Sense::Maximize ? obj_[var] : -obj_[var];
}

void SimplexSolver::ftran(int var, std::vector<double>& w) const {
  w.assign(m_, 0.0);
  for (auto [r, v] : cols_[var]) {
    const double* col = &binv_[static_cast<size_t>(r) * stride_];
    for (int i = 0; i < m_; ++i) w[i] += v * col[i];
  }
}

std::vector<double> SimplexSolver::basis_prices(const std::vector<double>& cost_of_basic) const {
  std::vector<double> pi(m_);
  for (int c = 0; c < m_; ++c) {
    const double* col = &binv_[static_cast<size_t>(c) * stride_];
    double acc = 0.0;
    for (int i = 0; i < m_; ++i) acc += cost_of_basic[i] * col[i];
    pi[c] = acc;
  }
  return pi;
}

double SimplexSolver::infeasibility(std::vector<double>* gamma) const {
  double total = 0.0;
  if (gamma) gamma->assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const int v = basis_[i];
    if (val_[v] < lo_[v] - 1e-10) {
      total += lo_[v] - val_[v];
      if (gamma) (*gamma)[i] = -1.0;
    } else if (val_[v] > hi_[v] + 1e-10) {
      total += val_[v] - hi_[v];
      if (gamma) (*gamma)[i] = 1.0;
    }
  }
  return total;
}

SimplexSolver::RatioResult SimplexSolver::ratio_test(int entering, int dir,
                                                     const std::vector<double>& w,
                                                     bool phase_one) const {
  RatioResult rr;
  double t_best = kInf;
  double best_pivot = 0.0;
  const bool bland = pricing_ == Pricing::Bland || degenerate_run_ > kBlandTrigger;
  for (int i = 0; i < m_; ++i) {
    const double wi = w[i];
    if (std::abs(wi) <= kZeroTol) continue;
    const double delta = -dir * wi;  // rate of change of this basic value
    const int v = basis_[i];
    const double x = val_[v];
    double bound;
    if (delta > 0) {
      if (phase_one && x < lo_[v] - 1e-9) bound = lo_[v];
      else if (hi_[v] < kInf && !(phase_one && x > hi_[v] + 1e-9)) bound = hi_[v];
      else continue;
      double t = std::max(0.0, (bound - x) / delta);
      if (t < t_best - 1e-12 ||
          (t <= t_best + 1e-12 &&
           (bland ? (rr.leaving_pos >= 0 && v < basis_[rr.leaving_pos])
                  : std::abs(wi) > best_pivot))) {
        t_best = std::min(t, t_best);
        rr.leaving_pos = i;
        rr.to_upper = (bound == hi_[v]);
        best_pivot = std::abs(wi);
      }
    } else {
      if (phase_one && x > hi_[v] + 1e-9) bound = hi_[v];
      else if (lo_[v] > -kInf && !(phase_one && x < lo_[v] - 1e-9)) bound = lo_[v];
      else continue;
      double t = std::max(0.0, (bound - x) / delta);
      if (t < t_best - 1e-12 ||
          (t <= t_best + 1e-12 &&
           (bland ? (rr.leaving_pos >= 0 && v < basis_[rr.leaving_pos])
                  : std::abs(wi) > best_pivot))) {
        t_best = std::min(t, t_best);
        rr.leaving_pos = i;
        rr.to_upper = (bound == hi_[v]);
        best_pivot = std::abs(wi);
      }
    }
  }
  const double t_flip =
      (lo_[entering] > -kInf && hi_[entering] < kInf) ? hi_[entering] - lo_[entering] : kInf;
  if (t_flip <= t_best) {
    if (t_flip >= kInf) {
      rr.unbounded = true;
      return rr;
    }
    rr.bound_flip = true;
    rr.step = t_flip;
    rr.leaving_pos = -1;
    return rr;
  }
  if (rr.leaving_pos < 0) {
    rr.unbounded = true;
    return rr;
  }
  rr.step = t_best;
  return rr;
}

void SimplexSolver::apply_step(int entering, int dir, const std::vector<double>& w,
                               const RatioResult& rr) {
  ++pivots_;
  const double t = rr.step;
  degenerate_run_ = (t <= 1e-12) ? degenerate_run_ + 1 : 0;
  for (int i = 0; i < m_; ++i)
    if (w[i] != 0.0) val_[basis_[i]] -= dir * w[i] * t;
  if (rr.bound_flip) {
    status_[entering] =
        status_[entering] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
    val_[entering] = status_[entering] == VarStatus::AtUpper ? hi_[entering] : lo_[entering];
    return;
  }
  val_[entering] = (status_[entering] == VarStatus::AtLower ? lo_[entering] : hi_[entering]) + dir * t;
  const int lr = rr.leaving_pos;
  const int leaving = basis_[lr];
  val_[leaving] = rr.to_upper ? hi_[leaving] : lo_[leaving];
  status_[leaving] = rr.to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
  basis_pos_[leaving] = -1;
  status_[entering] = VarStatus::Basic;
  basis_[lr] = entering;
  basis_pos_[entering] = lr;

  const double pivot = w[lr];
  for (int c = 0; c < m_; ++c) {
    double* col = &binv_[static_cast<size_t>(c) * stride_];
    const double vv = col[lr] / pivot;
    if (vv == 0.0) continue;
    for (int i = 0; i < m_; ++i) col[i] -= w[i] * vv;
    col[lr] = vv;
  }
}

void SimplexSolver::recompute_values() {
  std::vector<double> r(rhs_);
  for (int j = 0; j < n_total_; ++j) {
    if (status_[j] == VarStatus::Basic || val_[j] == 0.0) continue;
    for (auto [row, c] : cols_[j]) r[row] -= c * val_[j];
  }
  std::vector<double> xb(m_, 0.0);
  for (int c = 0; c < m_; ++c) {
    const double rc = r[c];
    if (rc == 0.0) continue;
    const double* col = &binv_[static_cast<size_t>(c) * stride_];
    for (int i = 0; i < m_; ++i) xb[i] += rc * col[i];
  }
  for (int i = 0; i < m_; ++i) val_[basis_[i]] = xb[i];
}

void SimplexSolver::refactorize() {
  // Rebuild B^-1 from the basis by Gauss-Jordan with partial pivoting.
  // A numerically dependent basis column is repaired by swapping in the
  // slack of a not-yet-pivoted row; the evicted variable leaves at its
  // nearest bound and phase 1 absorbs the disturbance.
  const size_t n = static_cast<size_t>(m_);
  std::vector<double> a(n * n, 0.0), inv(n * n, 0.0);  // row-major work copies
  std::vector<int> perm(m_);                           // current row -> original row
  for (int i = 0; i < m_; ++i) perm[i] = i;
  for (int c = 0; c < m_; ++c)
    for (auto [row, v] : cols_[basis_[c]]) a[static_cast<size_t>(row) * n + c] = v;
  for (size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t i = c + 1; i < n; ++i)
      if (std::abs(a[i * n + c]) > std::abs(a[piv * n + c])) piv = i;
    if (std::abs(a[piv * n + c]) < 1e-11) {
      bool repaired = false;
      for (size_t r = c; r < n && !repaired; ++r) {
        const int sv = slack_of_row_[perm[r]];
        if (status_[sv] == VarStatus::Basic) continue;
        // Column of this slack after the eliminations so far is inv * e_row.
        for (size_t i = 0; i < n; ++i) a[i * n + c] = inv[i * n + perm[r]];
        size_t p2 = c;
        for (size_t i = c + 1; i < n; ++i)
          if (std::abs(a[i * n + c]) > std::abs(a[p2 * n + c])) p2 = i;
        if (std::abs(a[p2 * n + c]) < 1e-11) continue;
        const int old = basis_[c];
        const double dlo = lo_[old] > -kInf ? std::abs(val_[old] - lo_[old]) : kInf;
        const double dhi = hi_[old] < kInf ? std::abs(val_[old] - hi_[old]) : kInf;
        if (dlo <= dhi) {
          status_[old] = VarStatus::AtLower;
          val_[old] = lo_[old];
        } else {
          status_[old] = VarStatus::AtUpper;
          val_[old] = hi_[old];
        }
        basis_pos_[old] = -1;
        basis_[c] = sv;
        basis_pos_[sv] = static_cast<int>(c);
        status_[sv] = VarStatus::Basic;
        piv = p2;
        repaired = true;
      }
      if (!repaired)
        throw std::runtime_error("simplex: singular basis during refactorization");
    }
    if (piv != c) {
      std::swap(perm[piv], perm[c]);
      for (size_t k = 0; k < n; ++k) {
        std::swap(a[piv * n + k], a[c * n + k]);
        std::swap(inv[piv * n + k], inv[c * n + k]);
      }
    }
    const double d = a[c * n + c];
    for (size_t k = 0; k < n; ++k) {
      a[c * n + k] /= d;
      inv[c * n + k] /= d;
    }
    for (size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const double f = a[i * n + c];
      if (f == 0.0) continue;
      for (size_t k = 0; k < n; ++k) {
        a[i * n + k] -= f * a[c * n + k];
        inv[i * n + k] -= f * inv[c * n + k];
      }
    }
  }
  for (int c = 0; c < m_; ++c)
    for (int i = 0; i < m_; ++i) binv(c, i) = inv[static_cast<size_t>(i) * n + c];
  recompute_values();
}

void SimplexSolver::crash_basis(const std::vector<int>& basic_in_row) {
  if (!loaded_) throw ValidationError("crash_basis: no problem loaded");
  if (static_cast<int>(basic_in_row.size()) != m_)
    throw ValidationError("crash_basis: one entry per row required");
  for (int j = 0; j < n_total_; ++j) {
    if (status_[j] != VarStatus::Basic) continue;
    const double dlo = lo_[j] > -kInf ? std::abs(val_[j] - lo_[j]) : kInf;
    const double dhi = hi_[j] < kInf ? std::abs(val_[j] - hi_[j]) : kInf;
    status_[j] = dlo <= dhi ? VarStatus::AtLower : VarStatus::AtUpper;
    val_[j] = status_[j] == VarStatus::AtLower ? lo_[j] : hi_[j];
    basis_pos_[j] = -1;
  }
  for (int r = 0; r < m_; ++r) {
    const int v =
        basic_in_row[r] >= 0 ? struct_var_.at(basic_in_row[r]) : slack_of_row_[r];
    if (status_[v] == VarStatus::Basic)
      throw ValidationError("crash_basis: variable named for two rows");
    basis_[r] = v;
    basis_pos_[v] = r;
    status_[v] = VarStatus::Basic;
  }
  degenerate_run_ = 0;
  refactorize();  // also recomputes basic values; repairs a singular pick
}

SimplexSolver::PhaseResult SimplexSolver::phase_one() {
  std::vector<double> gamma, pi, w, neg_pi(m_);
  const long long cap = 20000 + 400LL * (m_ + n_total_);
  long long iters = 0;
  bool refactored = false;
  while (true) {
    if (++iters > cap) throw std::runtime_error("simplex: phase-1 iteration cap exceeded");
    if (degenerate_run_ > kPerturbTrigger) return PhaseResult::Stalled;
    if (iters % 2000 == 0) recompute_values();
    const double infeas = infeasibility(&gamma);
    if (iters % 2000 == 0 && std::getenv("FAIRASSIGN_TRACE"))
      std::fprintf(stderr, "  ph1 iters=%lld infeas=%.3e degrun=%d\n", iters, infeas, degenerate_run_);
    if (infeas <= 1e-8) return PhaseResult::Done;
    pi = basis_prices(gamma);
    for (int c = 0; c < m_; ++c) neg_pi[c] = -pi[c];
    const bool bland = pricing_ == Pricing::Bland || degenerate_run_ > kBlandTrigger;
    int entering = -1, dir = 0;
    double best_score = kPivTol;
    for (int j = 0; j < n_total_; ++j) {
      if (status_[j] == VarStatus::Basic || lo_[j] == hi_[j]) continue;
      double d = 0.0;
      for (auto [r, v] : cols_[j]) d -= neg_pi[r] * v;  // d = pi . a_j
      int this_dir;
      double score;
      if (status_[j] == VarStatus::AtLower && d > kPivTol) {
        this_dir = 1;
        score = d;
      } else if (status_[j] == VarStatus::AtUpper && d < -kPivTol) {
        this_dir = -1;
        score = -d;
      } else {
        continue;
      }
      if (bland) {
        entering = j;
        dir = this_dir;
        break;
      }
      if (score > best_score) {
        best_score = score;
        entering = j;
        dir = this_dir;
      }
    }
    if (entering < 0) {
      // No improving direction; verify against accumulated error first.
      recompute_values();
      if (infeasibility(nullptr) <= kFeasEps) return PhaseResult::Done;
      if (!refactored) {
        refactorize();
        refactored = true;
        continue;
      }
      return PhaseResult::Infeasible;
    }
    ftran(entering, w);
    RatioResult rr = ratio_test(entering, dir, w, /*phase_one=*/true);
    if (rr.unbounded)
      throw std::runtime_error("simplex: no blocking step in phase 1");
    apply_step(entering, dir, w, rr);
  }
}

SimplexSolver::PhaseResult SimplexSolver::phase_two() {
  std::vector<double> cb(m_), pi, w;
  const long long cap = 20000 + 400LL * (m_ + n_total_);
  long long iters = 0;
  while (true) {
    if (++iters > cap) throw std::runtime_error("simplex: phase-2 iteration cap exceeded");
    if (degenerate_run_ > kPerturbTrigger) return PhaseResult::Stalled;
    if (iters % 2000 == 0) recompute_values();
    if (iters % 2000 == 0 && std::getenv("FAIRASSIGN_TRACE"))
      std::fprintf(stderr, "  ph2 iters=%lld degrun=%d\n", iters, degenerate_run_);
    // A pivot may have pushed a basic variable out of bounds numerically;
    // phase 1 is re-entered by the caller when the final check fails.
    cb.resize(m_);
    for (int i = 0; i < m_; ++i) cb[i] = internal_cost(basis_[i]);
    pi = basis_prices(cb);
    const bool bland = pricing_ == Pricing::Bland || degenerate_run_ > kBlandTrigger;
    int entering = -1, dir = 0;
    double best_score = kPivTol;
    for (int j = 0; j < n_total_; ++j) {
      if (status_[j] == VarStatus::Basic || lo_[j] == hi_[j]) continue;
      double d = internal_cost(j);
      for (auto [r, v] : cols_[j]) d -= pi[r] * v;
      int this_dir;
      double score;
      if (status_[j] == VarStatus::AtLower && d > kPivTol) {
        this_dir = 1;
        score = d;
      } else if (status_[j] == VarStatus::AtUpper && d < -kPivTol) {
        this_dir = -1;
        score = -d;
      } else {
        continue;
      }
      if (bland) {
        entering = j;
        dir = this_dir;
        break;
      }
      if (score > best_score) {
        best_score = score;
        entering = j;
        dir = this_dir;
      }
    }
    if (entering < 0) return PhaseResult::Done;
    ftran(entering, w);
    RatioResult rr = ratio_test(entering, dir, w, /*phase_one=*/false);
    if (rr.unbounded) return PhaseResult::Unbounded;
    apply_step(entering, dir, w, rr);
  }
}

void SimplexSolver::perturb_bounds() {
  // Anti-degeneracy: expand every finite bound by a tiny random amount.
  // The current point stays feasible, ratio-test ties break, and zero
  // steps become small positive ones.  Deterministic per round so runs
  // reproduce.  restore_bounds() undoes the expansion before solve()
  // returns.
  if (!perturbed_) {
    lo_exact_ = lo_;
    hi_exact_ = hi_;
    perturbed_ = true;
  }
  std::uint64_t state = 0x9e3779b97f4a7c15ULL ^ (++perturb_round_ * 0xbf58476d1ce4e5b9ULL);
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return 0.5 + 0.5 * static_cast<double>(state >> 11) * 0x1.0p-53;  // in [0.5, 1)
  };
  for (int j = 0; j < n_total_; ++j) {
    const double scale = 1e-9 * (1.0 + std::abs(val_[j]));
    if (lo_exact_[j] > -kInf) lo_[j] = lo_exact_[j] - scale * next();
    if (hi_exact_[j] < kInf) hi_[j] = hi_exact_[j] + scale * next();
    if (status_[j] == VarStatus::AtLower) val_[j] = lo_[j];
    else if (status_[j] == VarStatus::AtUpper) val_[j] = hi_[j];
  }
  degenerate_run_ = 0;
  refactorize();  // a long degenerate run may have degraded the inverse
}

void SimplexSolver::restore_bounds() {
  if (!perturbed_) return;
  lo_ = lo_exact_;
  hi_ = hi_exact_;
  for (int j = 0; j < n_total_; ++j) {
    if (status_[j] == VarStatus::AtLower) val_[j] = lo_[j];
    else if (status_[j] == VarStatus::AtUpper) val_[j] = hi_[j];
  }
  perturbed_ = false;
  degenerate_run_ = 0;
  recompute_values();
}

SolveStatus SimplexSolver::solve() {
  if (!loaded_) throw std::logic_error("SimplexSolver: solve before load");
  int clean_attempts = 0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    const PhaseResult p1 = phase_one();
    if (p1 == PhaseResult::Stalled) {
      perturb_bounds();
      continue;
    }
    if (p1 == PhaseResult::Infeasible) {
      // The perturbation only relaxes bounds, so infeasibility of the
      // perturbed problem implies infeasibility of the original.
      restore_bounds();
      return SolveStatus::Infeasible;
    }
    const PhaseResult p2 = phase_two();
    if (p2 == PhaseResult::Stalled) {
      perturb_bounds();
      continue;
    }
    if (p2 == PhaseResult::Unbounded) {
      restore_bounds();
      return SolveStatus::Unbounded;
    }
    if (perturbed_) {
      // Optimal for the expanded bounds; restore and re-optimize from
      // this (nearly feasible, nearly optimal) basis.
      restore_bounds();
      continue;
    }
    recompute_values();
    if (infeasibility(nullptr) <= kFeasEps) return SolveStatus::Optimal;
    if (++clean_attempts >= 3) break;
    refactorize();
  }
  throw std::runtime_error("simplex: could not verify feasibility after refactorization");
}

int SimplexSolver::add_row(Relation rel, double rhs,
                           const std::vector<std::pair<int, double>>& coeffs) {
  const int r = m_;
  grow_binv(m_ + 1);
  // Bordered inverse: new slack basic in the new row.
  std::vector<std::pair<int, double>> ab;  // (basis position, coefficient)
  double activity = 0.0;
  for (auto [uv, c] : coeffs) {
    const int v = struct_var_.at(uv);
    activity += c * val_[v];
    if (status_[v] == VarStatus::Basic) ab.push_back({basis_pos_[v], c});
  }
  for (int c = 0; c < m_; ++c) {
    const double* col = &binv_[static_cast<size_t>(c) * stride_];
    double acc = 0.0;
    for (auto [pos, coef] : ab) acc += coef * col[pos];
    binv(c, r) = -acc;
  }
  for (int i = 0; i < m_; ++i) binv(r, i) = 0.0;
  binv(r, r) = 1.0;

  cols_.emplace_back();
  double slo = 0.0, shi = 0.0;
  if (rel == Relation::LessEqual) shi = kInf;
  if (rel == Relation::GreaterEqual) slo = -kInf;
  lo_.push_back(slo);
  hi_.push_back(shi);
  obj_.push_back(0.0);
  val_.push_back(rhs - activity);
  status_.push_back(VarStatus::Basic);
  basis_pos_.push_back(r);
  const int sv = n_total_++;
  cols_[sv].push_back({r, 1.0});
  for (auto [uv, c] : coeffs)
    if (c != 0.0) cols_[struct_var_[uv]].push_back({r, c});
  rhs_.push_back(rhs);
  rel_.push_back(rel);
  slack_of_row_.push_back(sv);
  basis_.push_back(sv);
  ++m_;
  return r;
}

int SimplexSolver::add_variable(double lo, double hi, double obj,
                                const std::vector<std::pair<int, double>>& column) {
  cols_.emplace_back();
  lo_.push_back(lo);
  hi_.push_back(hi);
  obj_.push_back(obj);
  double v0;
  VarStatus st;
  if (lo > -kInf && (hi >= kInf || std::abs(lo) <= std::abs(hi))) {
    v0 = lo;
    st = VarStatus::AtLower;
  } else if (hi < kInf) {
    v0 = hi;
    st = VarStatus::AtUpper;
  } else {
    throw ValidationError("SimplexSolver: free variables are not supported");
  }
  val_.push_back(v0);
  status_.push_back(st);
  basis_pos_.push_back(-1);
  const int iv = n_total_++;
  for (auto [r, c] : column)
    if (c != 0.0) cols_[iv].push_back({r, c});
  struct_var_.push_back(iv);
  if (v0 != 0.0) {
    std::vector<double> w;
    ftran(iv, w);
    for (int i = 0; i < m_; ++i) val_[basis_[i]] -= w[i] * v0;
  }
  return static_cast<int>(struct_var_.size()) - 1;
}

void SimplexSolver::set_objective(const std::vector<double>& obj, Sense sense, double constant) {
  if (obj.size() != struct_var_.size())
    throw ValidationError("set_objective: size mismatch");
  for (double& o : obj_) o = 0.0;
  for (size_t u = 0; u < obj.size(); ++u) obj_[struct_var_[u]] = obj[u];
  sense_ = sense;
  obj_const_ = constant;
}

void SimplexSolver::set_objective_coeff(int var, double coeff) {
  obj_[struct_var_.at(var)] = coeff;
}

void SimplexSolver::set_bounds(int var, double lo, double hi) {
  const int v = struct_var_.at(var);
  if (lo > hi) throw ValidationError("set_bounds: lower > upper");
  lo_[v] = lo;
  hi_[v] = hi;
  if (status_[v] == VarStatus::Basic) return;
  double target = std::clamp(val_[v], lo, hi);
  VarStatus st;
  if (target == lo && lo > -kInf) st = VarStatus::AtLower;
  else if (target == hi && hi < kInf) st = VarStatus::AtUpper;
  else if (lo > -kInf && (hi >= kInf || std::abs(target - lo) <= std::abs(hi - target))) {
    target = lo;
    st = VarStatus::AtLower;
  } else if (hi < kInf) {
    target = hi;
    st = VarStatus::AtUpper;
  } else {
    throw ValidationError("SimplexSolver: free variables are not supported");
  }
  const double delta = target - val_[v];
  if (delta != 0.0) {
    // x_B = B^-1 (b - A_N x_N): raising x_N by delta lowers x_B by B^-1 a_v delta.
    std::vector<double> w;
    ftran(v, w);
    for (int i = 0; i < m_; ++i) val_[basis_[i]] -= w[i] * delta;
  }
  val_[v] = target;
  status_[v] = st;
}

void SimplexSolver::set_row_rhs(int row, double rhs) {
  const double delta = rhs - rhs_[row];
  if (delta == 0.0) return;
  rhs_[row] = rhs;
  const double* col = &binv_[static_cast<size_t>(row) * stride_];
  for (int i = 0; i < m_; ++i) val_[basis_[i]] += col[i] * delta;
}

double SimplexSolver::value(int var) const { return val_[struct_var_.at(var)]; }

std::vector<double> SimplexSolver::values() const {
  std::vector<double> out(struct_var_.size());
  for (size_t u = 0; u < struct_var_.size(); ++u) out[u] = val_[struct_var_[u]];
  return out;
}

double SimplexSolver::objective_value() const {
  double acc = obj_const_;
  for (int v : struct_var_) acc += obj_[v] * val_[v];
  return acc;
}

VertexSolution SimplexSolver::extract() const {
  VertexSolution s;
  s.values.resize(struct_var_.size());
  s.var_status.resize(struct_var_.size());
  for (size_t u = 0; u < struct_var_.size(); ++u) {
    s.values[u] = val_[struct_var_[u]];
    s.var_status[u] = status_[struct_var_[u]];
  }
  s.objective = objective_value();
  s.row_tight.resize(m_);
  for (int r = 0; r < m_; ++r) {
    const int sv = slack_of_row_[r];
    s.row_tight[r] = rel_[r] == Relation::Equal || status_[sv] != VarStatus::Basic ||
                     std::abs(val_[sv]) <= kFeasEps;
  }
  return s;
}

SolveResult solve_vertex(const LpProblem& p) {
  SimplexSolver solver;
  solver.load(p);
  SolveResult res;
  res.status = solver.solve();
  if (res.status == SolveStatus::Optimal) res.solution = solver.extract();
  return res;
}

LpProblem fix_variables(const LpProblem& p, std::vector<std::pair<int, double>> fixes,
                        std::vector<int>* kept_rows) {
  if (kept_rows) kept_rows->clear();
  std::sort(fixes.begin(), fixes.end());
  std::vector<double> fixed_val(p.num_vars, 0.0);
  std::vector<bool> is_fixed(p.num_vars, false);
  for (auto [v, x] : fixes) {
    if (v < 0 || v >= p.num_vars) throw ValidationError("fix_variable: variable out of range");
    if (x < p.lower[v] - 1e-9 || x > p.upper[v] + 1e-9)
      throw ValidationError("fix_variable: value outside bounds for variable " + std::to_string(v));
    if (is_fixed[v]) throw ValidationError("fix_variable: duplicate variable");
    is_fixed[v] = true;
    fixed_val[v] = std::clamp(x, p.lower[v], p.upper[v]);
  }
  std::vector<int> remap(p.num_vars, -1);
  LpProblem q;
  q.sense = p.sense;
  q.objective_constant = p.objective_constant;
  for (int v = 0; v < p.num_vars; ++v) {
    if (is_fixed[v]) {
      q.objective_constant += p.objective[v] * fixed_val[v];
      continue;
    }
    remap[v] = q.add_variable(p.lower[v], p.upper[v], p.objective[v]);
  }
  for (size_t ri = 0; ri < p.rows.size(); ++ri) {
    const LpRow& row = p.rows[ri];
    LpRow nr;
    nr.rel = row.rel;
    nr.rhs = row.rhs;
    for (auto [v, c] : row.coeffs) {
      if (is_fixed[v]) nr.rhs -= c * fixed_val[v];
      else nr.coeffs.push_back({remap[v], c});
    }
    if (nr.coeffs.empty()) {
      // Drop rows satisfied by the substitution; keep violated ones so the
      // reduced problem reports infeasibility instead of hiding it.
      const bool ok = (nr.rel == Relation::LessEqual && nr.rhs >= -kFeasEps) ||
                      (nr.rel == Relation::GreaterEqual && nr.rhs <= kFeasEps) ||
                      (nr.rel == Relation::Equal && std::abs(nr.rhs) <= kFeasEps);
      if (ok) continue;
    }
    if (kept_rows) kept_rows->push_back(static_cast<int>(ri));
    q.rows.push_back(std::move(nr));
  }
  return q;
}

LpProblem fix_variable(const LpProblem& p, int var, double value) {
  return fix_variables(p, {{var, value}});
}

std::string dump_lp(const LpProblem& p) {
  std::ostringstream os;
  os.precision(17);
  os << (p.sense == Sense::Maximize ? "Maximize" : "Minimize") << "\n obj:";
  for (int v = 0; v < p.num_vars; ++v)
    if (p.objective[v] != 0.0) os << " " << (p.objective[v] >= 0 ? "+" : "") << p.objective[v] << " x" << v;
  os << "\nSubject To\n";
  for (size_t r = 0; r < p.rows.size(); ++r) {
    os << " c" << r << ":";
    for (auto [v, c] : p.rows[r].coeffs) os << " " << (c >= 0 ? "+" : "") << c << " x" << v;
    switch (p.rows[r].rel) {
      case Relation::LessEqual: os << " <= "; break;
      case Relation::GreaterEqual: os << " >= "; break;
      case Relation::Equal: os << " = "; break;
    }
    os << p.rows[r].rhs << "\n";
  }
  os << "Bounds\n";
  for (int v = 0; v < p.num_vars; ++v) {
    if (p.lower[v] <= -kInf) os << " -inf";
    else os << " " << p.lower[v];
    os << " <= x" << v << " <= ";
    if (p.upper[v] >= kInf) os << "+inf\n";
    else os << p.upper[v] << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace fairassign
