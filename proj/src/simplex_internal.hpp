// In-process LP machinery shared by the builtin backend and its
// branch-and-bound wrapper.  Bounded-variable primal simplex with an
// explicit dense inverse of the basis, product-form updates, and periodic
// refactorization through Eigen.
#ifndef WDRUC_SIMPLEX_INTERNAL_HPP
#define WDRUC_SIMPLEX_INTERNAL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "wdruc/solver.hpp"

namespace wdruc::internal {

// Variable layout: structurals 0..n-1, then one logical per row holding the
// row activity with bounds derived from the relation and rhs.
struct LpProblem {
  int n = 0;  // structural variables
  int m = 0;  // rows
  std::vector<std::vector<std::pair<int, double>>> cols;  // structural columns
  std::vector<double> lb, ub;  // size n + m
  std::vector<double> cost;    // size n, minimize
};

enum class VarState : std::uint8_t { basic = 0, at_lower, at_upper, free_zero };

struct Basis {
  std::vector<int> basic;          // size m
  std::vector<VarState> state;     // size n + m
  bool valid = false;
};

struct LpResult {
  SolveStatus status = SolveStatus::limit;
  double obj = 0.0;
  std::vector<double> x;  // size n + m
  std::vector<double> y;  // row duals, size m
  long iterations = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  long max_iterations = 0;  // 0: derived from problem size
};

// Solves min cost'x over the problem.  If `warm` is a valid basis it is used
// as the starting point and receives the final basis on return.
LpResult solve_lp(const LpProblem& prob, const SimplexOptions& opts,
                  Basis* warm = nullptr);

// Builds the column-wise computational form from a Model (objective
// normalized to minimize; caller handles sense when reporting).
LpProblem to_lp_problem(const Model& model);

}  // namespace wdruc::internal

#endif  // WDRUC_SIMPLEX_INTERNAL_HPP
