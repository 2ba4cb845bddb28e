#ifndef WDRUC_ROBUST_HPP
#define WDRUC_ROBUST_HPP

#include <functional>
#include <vector>

#include "wdruc/core_uc.hpp"
#include "wdruc/solver.hpp"
#include "wdruc/system.hpp"

namespace wdruc {

struct RobustOptions {
  double ccg_gap = 1e-4;   // relative master/subproblem gap
  int ccg_max_iter = 50;
  double feas_tol = 1e-6;  // MW-scaled feasibility certification tolerance
  int max_enum_dims = 12;  // per-period vertex enumeration cutoff
  SolveParams solve;
};

/// Error scenarios accumulated by column-and-constraint generation.
struct ScenarioPool {
  struct Entry {
    std::vector<std::vector<double>> w;  // [unit][period]
    bool feasibility_cut = false;        // origin tag
  };
  std::vector<Entry> entries;

  /// Appends unless an entry with the same w (within 1e-9) exists.
  bool add(std::vector<std::vector<double>> w, bool feasibility_cut);
};

struct RobustSolution {
  SolveStatus status = SolveStatus::limit;
  CommitmentSchedule schedule;
  DispatchRange range;
  double objective = 0.0;    // best upper bound
  double lower_bound = 0.0;  // final master bound
  int iterations = 0;
  int pool_size = 0;
  bool certified = false;
  int master_rows = 0, master_cols = 0;
  std::vector<double> lower_history, upper_history;
};

struct WorstCaseResult {
  bool recourse_feasible = true;  // false: some vertex has empty recourse
  double cost = 0.0;
  std::vector<std::vector<double>> witness;  // [unit][period]
};

struct FeasibilityResult {
  double violation = 0.0;  // max over periods of the elastic optimum
  int worst_period = -1;
  std::vector<std::vector<double>> witness;  // [unit][period]
};

/// Maximizes the second-stage cost f over the box; separable across
/// periods.  Uses vertex enumeration up to `max_enum_dims` effective
/// uncertain dimensions per period, else the dualized big-M MILP.
WorstCaseResult worst_case_cost(const SystemData& sys,
                                const DispatchRange& range,
                                const ForecastSeries& forecast,
                                const UncertaintyBox& box,
                                const RobustOptions& opts = {});

/// Elastic feasibility check of the recourse polytope over the box: slack
/// on balance and line limits with unit cost, bounds hard.  A violation
/// within feas_tol certifies nonempty recourse for every box point.
FeasibilityResult feasibility_subproblem(const SystemData& sys,
                                         const DispatchRange& range,
                                         const ForecastSeries& forecast,
                                         const UncertaintyBox& box,
                                         const RobustOptions& opts = {});

/// Elastic single-period dispatch: minimal total constraint violation.
double elastic_dispatch_violation(const SystemData& sys,
                                  const DispatchRange& range,
                                  const ForecastSeries& forecast,
                                  const std::vector<double>& w_t, int t,
                                  const ShiftFactorMatrix* ptdf = nullptr);

/// Column-and-constraint generation for the two-stage robust UC.
RobustSolution solve_ruc(const SystemData& sys, const ForecastSeries& forecast,
                         const UncertaintyBox& box,
                         const RobustOptions& opts = {});

namespace internal {

/// Invokes `fn` for every vertex of the per-period box restricted to its
/// effective (positive-width) coordinates; degenerate coordinates stay at
/// their fixed value.  Returns the number of vertices visited.
long for_each_period_vertex(const UncertaintyBox& box, int t,
                            const std::function<void(const std::vector<double>&)>& fn);

/// Worst case of one period by the dualized big-M MILP; elastic=true swaps
/// in the feasibility (slack) objective.  Exposed for the enumeration
/// cross-check in tests.
struct PeriodWorst {
  double value = 0.0;
  std::vector<double> w_t;
  bool recourse_feasible = true;
};
PeriodWorst period_worst_dual_milp(const SystemData& sys,
                                   const DispatchRange& range,
                                   const ForecastSeries& forecast,
                                   const UncertaintyBox& box, int t,
                                   bool elastic, const RobustOptions& opts);

}  // namespace internal

}  // namespace wdruc

#endif  // WDRUC_ROBUST_HPP
