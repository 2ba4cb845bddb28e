#include "simplex_internal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace wdruc::internal {

namespace {

constexpr double kPivotTol = 1e-9;

class Simplex {
 public:
  Simplex(const LpProblem& p, const SimplexOptions& opts)
      : p_(p), opts_(opts), total_(p.n + p.m) {
    max_iters_ = opts.max_iterations > 0
                     ? opts.max_iterations
                     : 20000 + 200L * static_cast<long>(total_);
  }

  LpResult run(Basis* warm);

 private:
  const LpProblem& p_;
  SimplexOptions opts_;
  int total_;
  long max_iters_;
  long iter_ = 0;
  long degenerate_streak_ = 0;
  bool bland_ = false;
  int updates_since_refactor_ = 0;

  std::vector<int> basic_;          // var index per basis position
  std::vector<int> position_;      // basis position per var, -1 if nonbasic
  std::vector<VarState> state_;    // per var
  std::vector<double> xval_;       // per var
  std::vector<double> binv_;       // m*m, column-major: binv_[k*m + i] = (B^-1)[i][k]
  std::vector<double> y_;          // btran scratch, size m
  std::vector<double> alpha_;      // ftran scratch, size m
  std::vector<double> dB_;         // basic cost vector, size m

  double lb(int j) const { return p_.lb[j]; }
  double ub(int j) const { return p_.ub[j]; }

  // Applies column j of [A | -I] into dense vector out with multiplier s.
  void axpy_col(int j, double s, std::vector<double>& out) const {
    if (j < p_.n) {
      for (const auto& [row, v] : p_.cols[j]) out[row] += s * v;
    } else {
      out[j - p_.n] -= s;
    }
  }

  void ftran(int j, std::vector<double>& out) const {
    const int m = p_.m;
    std::fill(out.begin(), out.end(), 0.0);
    if (j < p_.n) {
      for (const auto& [row, v] : p_.cols[j]) {
        const double* col = &binv_[static_cast<std::size_t>(row) * m];
        for (int i = 0; i < m; ++i) out[i] += v * col[i];
      }
    } else {
      const double* col = &binv_[static_cast<std::size_t>(j - p_.n) * m];
      for (int i = 0; i < m; ++i) out[i] -= col[i];
    }
  }

  void btran(const std::vector<double>& d, std::vector<double>& out) const {
    const int m = p_.m;
    for (int k = 0; k < m; ++k) {
      const double* col = &binv_[static_cast<std::size_t>(k) * m];
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += d[i] * col[i];
      out[k] = acc;
    }
  }

  double dot_col(int j, const std::vector<double>& y) const {
    if (j < p_.n) {
      double acc = 0.0;
      for (const auto& [row, v] : p_.cols[j]) acc += y[row] * v;
      return acc;
    }
    return -y[j - p_.n];
  }

  void start_logical_basis();
  void start_from(const Basis& warm);
  void refactorize();
  void recompute_basic_values();
  double infeasibility(int j) const;
  double total_infeasibility() const;
  void load_phase_costs(bool phase1);
  int price(bool phase1, int& direction);
  bool pivot(int entering, int direction, bool phase1, bool& progressed);
  LpResult finish(SolveStatus st, bool compute_duals);
};

void Simplex::start_logical_basis() {
  const int m = p_.m;
  basic_.resize(m);
  position_.assign(total_, -1);
  state_.assign(total_, VarState::at_lower);
  for (int j = 0; j < total_; ++j) {
    if (j >= p_.n) continue;
    if (lb(j) > -kInf) {
      state_[j] = VarState::at_lower;
    } else if (ub(j) < kInf) {
      state_[j] = VarState::at_upper;
    } else {
      state_[j] = VarState::free_zero;
    }
  }
  for (int i = 0; i < m; ++i) {
    const int j = p_.n + i;
    basic_[i] = j;
    position_[j] = i;
    state_[j] = VarState::basic;
  }
  binv_.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i)
    binv_[static_cast<std::size_t>(i) * m + i] = -1.0;  // inverse of -I
  recompute_basic_values();
}

void Simplex::start_from(const Basis& warm) {
  const int m = p_.m;
  basic_ = warm.basic;
  state_ = warm.state;
  position_.assign(total_, -1);
  for (int i = 0; i < m; ++i) position_[basic_[i]] = i;
  // Nonbasic states may reference bounds that no longer exist after branch
  // bound changes; repair them.
  for (int j = 0; j < total_; ++j) {
    if (position_[j] >= 0) {
      state_[j] = VarState::basic;
      continue;
    }
    VarState s = state_[j];
    if (s == VarState::at_lower && lb(j) <= -kInf)
      s = ub(j) < kInf ? VarState::at_upper : VarState::free_zero;
    if (s == VarState::at_upper && ub(j) >= kInf)
      s = lb(j) > -kInf ? VarState::at_lower : VarState::free_zero;
    if (s == VarState::basic) s = VarState::at_lower;  // defensive repair
    state_[j] = s;
  }
  refactorize();
}

void Simplex::refactorize() {
  const int m = p_.m;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const int j = basic_[i];
    if (j < p_.n) {
      for (const auto& [row, v] : p_.cols[j]) B(row, i) = v;
    } else {
      B(j - p_.n, i) = -1.0;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  Eigen::MatrixXd inv = lu.inverse();
  if (!inv.allFinite()) throw SolverError("singular basis in builtin simplex");
  binv_.resize(static_cast<std::size_t>(m) * m);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      binv_[static_cast<std::size_t>(k) * m + i] = inv(i, k);
  updates_since_refactor_ = 0;
  recompute_basic_values();
}

void Simplex::recompute_basic_values() {
  const int m = p_.m;
  xval_.assign(total_, 0.0);
  std::vector<double> rhs(m, 0.0);
  for (int j = 0; j < total_; ++j) {
    if (position_[j] >= 0) continue;
    double v = 0.0;
    switch (state_[j]) {
      case VarState::at_lower:
        v = lb(j);
        break;
      case VarState::at_upper:
        v = ub(j);
        break;
      default:
        v = 0.0;
    }
    xval_[j] = v;
    if (v != 0.0) axpy_col(j, -v, rhs);
  }
  // x_B = B^-1 * rhs
  std::vector<double> xb(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const double r = rhs[k];
    if (r == 0.0) continue;
    const double* col = &binv_[static_cast<std::size_t>(k) * m];
    for (int i = 0; i < m; ++i) xb[i] += r * col[i];
  }
  for (int i = 0; i < m; ++i) xval_[basic_[i]] = xb[i];
}

double Simplex::infeasibility(int j) const {
  const double v = xval_[j];
  if (v < lb(j)) return lb(j) - v;
  if (v > ub(j)) return v - ub(j);
  return 0.0;
}

double Simplex::total_infeasibility() const {
  double s = 0.0;
  for (int i = 0; i < p_.m; ++i) s += infeasibility(basic_[i]);
  return s;
}

void Simplex::load_phase_costs(bool phase1) {
  const int m = p_.m;
  dB_.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const int j = basic_[i];
    if (phase1) {
      if (xval_[j] < lb(j) - opts_.feas_tol)
        dB_[i] = -1.0;
      else if (xval_[j] > ub(j) + opts_.feas_tol)
        dB_[i] = 1.0;
    } else {
      dB_[i] = j < p_.n ? p_.cost[j] : 0.0;
    }
  }
}

// Returns the entering variable (or -1 at optimality) and its direction.
int Simplex::price(bool phase1, int& direction) {
  btran(dB_, y_);
  int best = -1;
  double best_score = phase1 ? -opts_.feas_tol : -opts_.opt_tol;
  int best_dir = 0;
  for (int j = 0; j < total_; ++j) {
    if (position_[j] >= 0) continue;
    if (lb(j) == ub(j)) continue;  // fixed, never enters
    const double dj = (!phase1 && j < p_.n) ? p_.cost[j] : 0.0;
    const double z = dj - dot_col(j, y_);
    double score = 0.0;
    int dir = 0;
    switch (state_[j]) {
      case VarState::at_lower:
        score = z;
        dir = 1;
        break;
      case VarState::at_upper:
        score = -z;
        dir = -1;
        break;
      case VarState::free_zero:
        score = -std::abs(z);
        dir = z < 0 ? 1 : -1;
        break;
      default:
        continue;
    }
    if (bland_) {
      if (score < (phase1 ? -opts_.feas_tol : -opts_.opt_tol)) {
        direction = dir;
        return j;  // first eligible index
      }
    } else if (score < best_score) {
      best_score = score;
      best = j;
      best_dir = dir;
    }
  }
  direction = best_dir;
  return best;
}

// One ratio-test + pivot step.  Returns false on unboundedness.
bool Simplex::pivot(int entering, int direction, bool phase1,
                    bool& progressed) {
  const int m = p_.m;
  ftran(entering, alpha_);

  double best_ratio = kInf;
  int leave_pos = -1;
  double leave_pivot = 0.0;
  bool leave_at_upper = false;

  // Entering variable's own range (bound flip).
  {
    const double range = ub(entering) - lb(entering);
    if (range < kInf) best_ratio = range;
  }

  for (int i = 0; i < m; ++i) {
    const double a = alpha_[i];
    if (std::abs(a) <= kPivotTol) continue;
    const double delta = -direction * a;  // rate of change of basic i
    const int k = basic_[i];
    const double v = xval_[k];
    double ratio = kInf;
    bool hits_upper = false;
    if (phase1 && v < lb(k) - opts_.feas_tol) {
      if (delta > 0) ratio = (lb(k) - v) / delta;
    } else if (phase1 && v > ub(k) + opts_.feas_tol) {
      if (delta < 0) {
        ratio = (ub(k) - v) / delta;
        hits_upper = true;
      }
    } else if (delta > 0) {
      if (ub(k) < kInf) {
        ratio = (ub(k) - v) / delta;
        hits_upper = true;
      }
    } else {
      if (lb(k) > -kInf) ratio = (lb(k) - v) / delta;
    }
    if (ratio >= kInf) continue;
    if (ratio < 0) ratio = 0;  // numerical guard
    bool take = false;
    if (ratio < best_ratio - 1e-12) {
      take = true;
    } else if (ratio <= best_ratio + 1e-12 && leave_pos >= 0) {
      // Tie between blocking rows: prefer the larger pivot for stability
      // (smallest index under Bland's rule).
      take = bland_ ? basic_[i] < basic_[leave_pos]
                    : std::abs(a) > std::abs(leave_pivot);
    }
    if (take) {
      best_ratio = std::min(best_ratio, ratio);
      leave_pos = i;
      leave_pivot = a;
      leave_at_upper = hits_upper;
    }
  }

  if (best_ratio >= kInf) return false;  // unbounded direction

  progressed = best_ratio > 1e-11;
  const double step = direction * best_ratio;

  // Update basic values along the direction.
  if (best_ratio > 0) {
    for (int i = 0; i < m; ++i) {
      if (alpha_[i] != 0.0) xval_[basic_[i]] -= step * alpha_[i];
    }
  }

  if (leave_pos < 0) {
    // Bound flip of the entering variable.
    xval_[entering] = direction > 0 ? ub(entering) : lb(entering);
    state_[entering] = direction > 0 ? VarState::at_upper : VarState::at_lower;
    return true;
  }

  const int leaving = basic_[leave_pos];
  double enter_val;
  switch (state_[entering]) {
    case VarState::at_lower:
      enter_val = lb(entering) + step;
      break;
    case VarState::at_upper:
      enter_val = ub(entering) + step;
      break;
    default:
      enter_val = step;
  }
  xval_[leaving] = leave_at_upper ? ub(leaving) : lb(leaving);
  state_[leaving] = leave_at_upper ? VarState::at_upper : VarState::at_lower;
  position_[leaving] = -1;

  basic_[leave_pos] = entering;
  position_[entering] = leave_pos;
  state_[entering] = VarState::basic;
  xval_[entering] = enter_val;

  // Product-form update of the explicit inverse.
  const double piv = alpha_[leave_pos];
  std::vector<double>& rho = y_;  // reuse scratch
  rho.resize(m);
  for (int i = 0; i < m; ++i) rho[i] = alpha_[i] / piv;
  for (int k = 0; k < m; ++k) {
    double* col = &binv_[static_cast<std::size_t>(k) * m];
    const double t = col[leave_pos];
    if (t == 0.0) continue;
    for (int i = 0; i < m; ++i) col[i] -= rho[i] * t;
    col[leave_pos] = t / piv;
  }
  if (++updates_since_refactor_ >= 120) refactorize();
  return true;
}

LpResult Simplex::finish(SolveStatus st, bool compute_duals) {
  LpResult res;
  res.status = st;
  res.iterations = iter_;
  res.x = xval_;
  res.y.assign(p_.m, 0.0);
  if (compute_duals) {
    load_phase_costs(false);
    btran(dB_, res.y);
  }
  double obj = 0.0;
  for (int j = 0; j < p_.n; ++j) obj += p_.cost[j] * xval_[j];
  res.obj = obj;
  return res;
}

LpResult Simplex::run(Basis* warm) {
  const int m = p_.m;
  y_.resize(m);
  alpha_.resize(m);
  if (warm && warm->valid && static_cast<int>(warm->basic.size()) == m &&
      static_cast<int>(warm->state.size()) == total_) {
    start_from(*warm);
  } else {
    start_logical_basis();
  }

  bool phase1 = total_infeasibility() > opts_.feas_tol;
  long stall = 0;

  while (true) {
    if (++iter_ > max_iters_) {
      LpResult res = finish(SolveStatus::limit, false);
      if (warm) warm->valid = false;
      return res;
    }
    if (phase1 && total_infeasibility() <= opts_.feas_tol) phase1 = false;

    load_phase_costs(phase1);
    int direction = 0;
    const int entering = price(phase1, direction);
    if (entering < 0) {
      if (phase1) {
        // No improving direction with positive infeasibility: infeasible.
        if (warm) {
          warm->basic = basic_;
          warm->state = state_;
          warm->valid = true;
        }
        return finish(SolveStatus::infeasible, false);
      }
      if (warm) {
        warm->basic = basic_;
        warm->state = state_;
        warm->valid = true;
      }
      return finish(SolveStatus::optimal, true);
    }

    bool progressed = false;
    if (!pivot(entering, direction, phase1, progressed)) {
      if (phase1) {
        // Improving unblocked phase-1 ray should not happen; treat as
        // numerical trouble and refactorize once, then give up.
        refactorize();
        if (total_infeasibility() <= opts_.feas_tol) {
          phase1 = false;
          continue;
        }
        return finish(SolveStatus::infeasible, false);
      }
      if (warm) warm->valid = false;
      return finish(SolveStatus::unbounded, false);
    }
    if (progressed) {
      stall = 0;
      bland_ = false;
    } else if (++stall > 2L * total_ + 200) {
      bland_ = true;
    }
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& prob, const SimplexOptions& opts,
                  Basis* warm) {
  Simplex s(prob, opts);
  return s.run(warm);
}

LpProblem to_lp_problem(const Model& model) {
  LpProblem p;
  p.n = model.num_variables();
  p.m = model.num_constraints();
  p.cols.assign(p.n, {});
  p.lb.resize(p.n + p.m);
  p.ub.resize(p.n + p.m);
  p.cost.resize(p.n);
  const double sign = model.sense() == Sense::minimize ? 1.0 : -1.0;
  for (int j = 0; j < p.n; ++j) {
    const auto& v = model.variable(j);
    p.lb[j] = v.lower;
    p.ub[j] = v.upper;
    p.cost[j] = sign * v.obj;
  }
  for (int i = 0; i < p.m; ++i) {
    const auto& row = model.constraint(i);
    for (const auto& [var, coeff] : row.terms) {
      if (coeff != 0.0) p.cols[var].emplace_back(i, coeff);
    }
    switch (row.rel) {
      case Relation::less_equal:
        p.lb[p.n + i] = -kInf;
        p.ub[p.n + i] = row.rhs;
        break;
      case Relation::greater_equal:
        p.lb[p.n + i] = row.rhs;
        p.ub[p.n + i] = kInf;
        break;
      case Relation::equal:
        p.lb[p.n + i] = row.rhs;
        p.ub[p.n + i] = row.rhs;
        break;
    }
  }
  return p;
}

}  // namespace wdruc::internal
