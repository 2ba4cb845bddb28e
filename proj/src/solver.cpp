#include <cstdio>

#include "wdruc/solver.hpp"

namespace wdruc {

namespace {

// Size threshold under which the in-process simplex is preferred: it avoids
// the worker round trip, which dominates for the small per-period dispatch
// LPs solved by the thousands during evaluation.
bool small_enough_for_builtin(const Model& m) {
  const long rows = m.num_constraints();
  const long cols = m.num_variables();
  if (m.num_integer_variables() > 60) return false;
  return rows <= 500 && cols <= 600 && rows * cols <= 200'000;
}

}  // namespace

Solution solve(const Model& model, const SolveParams& params) {
  if (!(params.mip_gap > 0.0) || !(params.feas_tol > 0.0))
    throw SolverError("solve parameters require gap > 0 and tolerance > 0");
  Backend backend = params.backend;
  if (backend == Backend::automatic) {
    backend = small_enough_for_builtin(model) ? Backend::builtin : Backend::scipy;
  }
  if (backend == Backend::scipy && !scipy_backend_available()) {
    static bool warned = false;
    if (!warned) {
      std::fprintf(stderr,
                   "wdruc: scipy solver worker unavailable, falling back to "
                   "builtin simplex (large models will be slow)\n");
      warned = true;
    }
    backend = Backend::builtin;
  }
  if (backend == Backend::scipy) return solve_scipy(model, params);
  return solve_builtin(model, params);
}

}  // namespace wdruc
