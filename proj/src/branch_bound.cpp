#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "simplex_internal.hpp"

namespace wdruc {

namespace {

using internal::Basis;
using internal::LpProblem;
using internal::LpResult;
using internal::SimplexOptions;

constexpr double kIntTol = 1e-6;

struct Node {
  int parent = -1;
  int var = -1;  // bound patched at this node
  double lower = 0.0, upper = 0.0;
  double bound = -kInf;  // parent LP objective
  Basis basis;
};

struct QueueEntry {
  double bound;
  long order;
  int node;
  bool operator>(const QueueEntry& o) const {
    if (bound != o.bound) return bound > o.bound;
    return order > o.order;
  }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

}  // namespace

Solution solve_builtin(const Model& model, const SolveParams& params) {
  const double t_start = now_seconds();
  LpProblem root = internal::to_lp_problem(model);
  const double sense_sign = model.sense() == Sense::minimize ? 1.0 : -1.0;

  SimplexOptions sopts;
  std::vector<int> int_vars;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variable(j).integral) int_vars.push_back(j);
  }

  auto finalize = [&](SolveStatus st, double obj, const std::vector<double>& x,
                      const std::vector<double>& y, long) {
    Solution sol;
    sol.status = st;
    sol.rows = model.num_constraints();
    sol.cols = model.num_variables();
    sol.objective = sense_sign * obj + model.objective_offset();
    sol.values.assign(x.begin(), x.begin() + model.num_variables());
    if (!y.empty() && int_vars.empty()) {
      sol.row_duals.resize(model.num_constraints());
      for (int i = 0; i < model.num_constraints(); ++i)
        sol.row_duals[i] = sense_sign * y[i];
    }
    sol.wall_seconds = now_seconds() - t_start;
    return sol;
  };

  // Pure LP: single simplex call.
  if (int_vars.empty()) {
    LpResult r = internal::solve_lp(root, sopts, nullptr);
    return finalize(r.status, r.obj, r.x, r.y, r.iterations);
  }

  // Branch and bound, best-bound first.
  std::vector<Node> nodes;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>,
                      std::greater<QueueEntry>>
      open;
  long order = 0;

  nodes.push_back(Node{});
  open.push(QueueEntry{-kInf, order++, 0});

  bool have_incumbent = false;
  double incumbent_obj = kInf;
  std::vector<double> incumbent_x;
  bool hit_limit = false;
  long explored = 0;

  std::vector<double> lb0 = root.lb, ub0 = root.ub;
  std::vector<int> patch_chain;

  while (!open.empty()) {
    if (have_incumbent) {
      const double gap = incumbent_obj - open.top().bound;
      if (gap <= params.mip_gap * std::max(1.0, std::abs(incumbent_obj)))
        break;
    }
    if (params.time_limit &&
        now_seconds() - t_start > *params.time_limit) {
      hit_limit = true;
      break;
    }
    if (++explored > params.max_nodes) {
      hit_limit = true;
      break;
    }

    const QueueEntry entry = open.top();
    open.pop();
    if (have_incumbent &&
        entry.bound >=
            incumbent_obj -
                params.mip_gap * std::max(1.0, std::abs(incumbent_obj)))
      continue;

    // Rebuild bounds for this node from the patch chain.
    root.lb = lb0;
    root.ub = ub0;
    patch_chain.clear();
    for (int nid = entry.node; nid > 0; nid = nodes[nid].parent)
      patch_chain.push_back(nid);
    for (auto it = patch_chain.rbegin(); it != patch_chain.rend(); ++it) {
      const Node& nd = nodes[*it];
      root.lb[nd.var] = std::max(root.lb[nd.var], nd.lower);
      root.ub[nd.var] = std::min(root.ub[nd.var], nd.upper);
    }
    bool bounds_ok = true;
    for (int v : patch_chain)
      if (root.lb[nodes[v].var] > root.ub[nodes[v].var]) bounds_ok = false;
    if (!bounds_ok) continue;

    Basis warm = nodes[entry.node].basis;
    LpResult r = internal::solve_lp(root, sopts, &warm);
    if (r.status == SolveStatus::infeasible) continue;
    if (r.status == SolveStatus::unbounded) {
      // Unbounded relaxation at the root means an unbounded MILP (the
      // relaxation ray is integral-feasible for some integral point).
      if (entry.node == 0)
        return finalize(SolveStatus::unbounded, 0.0, std::vector<double>(
                            root.n + root.m, 0.0), {}, 0);
      continue;
    }
    if (r.status == SolveStatus::limit) {
      hit_limit = true;
      continue;
    }
    if (have_incumbent &&
        r.obj >= incumbent_obj -
                     params.mip_gap * std::max(1.0, std::abs(incumbent_obj)))
      continue;

    // Find most fractional integer variable.
    int branch_var = -1;
    double branch_frac = kIntTol;
    for (int v : int_vars) {
      const double x = r.x[v];
      const double frac = std::abs(x - std::round(x));
      if (frac > branch_frac) {
        branch_frac = frac;
        branch_var = v;
      }
    }
    if (branch_var < 0) {
      // Integral solution.
      if (r.obj < incumbent_obj) {
        incumbent_obj = r.obj;
        incumbent_x = r.x;
        for (int v : int_vars) incumbent_x[v] = std::round(incumbent_x[v]);
        have_incumbent = true;
      }
      continue;
    }

    const double xv = r.x[branch_var];
    Node down;
    down.parent = entry.node;
    down.var = branch_var;
    down.lower = -kInf;
    down.upper = std::floor(xv);
    down.bound = r.obj;
    down.basis = warm;
    nodes.push_back(down);
    open.push(QueueEntry{r.obj, order++, static_cast<int>(nodes.size()) - 1});

    Node up;
    up.parent = entry.node;
    up.var = branch_var;
    up.lower = std::ceil(xv);
    up.upper = kInf;
    up.bound = r.obj;
    up.basis = std::move(warm);
    nodes.push_back(up);
    open.push(QueueEntry{r.obj, order++, static_cast<int>(nodes.size()) - 1});
  }

  if (have_incumbent) {
    return finalize(hit_limit ? SolveStatus::limit : SolveStatus::optimal,
                    incumbent_obj, incumbent_x, {}, 0);
  }
  return finalize(hit_limit ? SolveStatus::limit : SolveStatus::infeasible,
                  0.0, std::vector<double>(root.n + root.m, 0.0), {}, 0);
}

}  // namespace wdruc
