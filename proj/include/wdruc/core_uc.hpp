#ifndef WDRUC_CORE_UC_HPP
#define WDRUC_CORE_UC_HPP

#include <optional>
#include <vector>

#include "wdruc/solver.hpp"
#include "wdruc/system.hpp"

namespace wdruc {

/// Binary commitment variable ids per (generator, period).
struct CommitmentVars {
  std::vector<std::vector<int>> on, up, down;  // [G][T]
};

/// Dispatch-range variable ids per (generator, period).
struct RangeVars {
  std::vector<std::vector<int>> upper, lower;  // [G][T]
};

/// Numeric dispatch ranges (first-stage decision).
struct DispatchRange {
  std::vector<std::vector<double>> upper, lower;  // [G][T]

  int generators() const { return static_cast<int>(upper.size()); }
  int periods() const { return upper.empty() ? 0 : static_cast<int>(upper[0].size()); }
};

/// Numeric commitment schedule.
struct CommitmentSchedule {
  std::vector<std::vector<int>> on, up, down;  // [G][T], 0/1
};

/// Variable ids of one period's recourse block, with the block's cost
/// expression (variable, marginal cost) for cut rows.
struct DispatchBlock {
  std::vector<int> gen;      // [G]
  std::vector<int> shed;     // [loads]
  std::vector<int> curtail;  // [R]
  std::vector<std::pair<int, double>> cost_terms;
};

/// Result of a single-period real-time dispatch.
struct DispatchResult {
  bool feasible = false;
  double cost = 0.0;
  std::vector<double> gen;      // [G] MW
  std::vector<double> shed;     // [loads] MW
  std::vector<double> curtail;  // [R] MW
};

struct SecondStageResult {
  bool feasible = false;
  double cost = 0.0;
  int failed_period = -1;  // 0-based, set when infeasible
};

struct DucModel {
  Model model;
  CommitmentVars commitment;
  std::vector<DispatchBlock> blocks;  // one per period
};

struct SucModel {
  Model model;
  CommitmentVars commitment;
  RangeVars ranges;
  std::vector<std::vector<DispatchBlock>> blocks;  // [sample][period]
};

/// S forecast-error vectors indexed (sample, unit, period), MW.
struct SampleSet {
  int count = 0;  // S
  std::vector<std::vector<std::vector<double>>> error;  // [s][unit][period]

  const std::vector<std::vector<double>>& sample(int s) const { return error[s]; }
};

/// Adds commitment binaries with their logic and minimum up/down rows, and
/// the fixed-cost objective terms.
CommitmentVars build_commitment_constraints(Model& model,
                                            const SystemData& sys);

/// Adds dispatch-range variables and the three constraint families coupling
/// them to the commitment (capacity nesting, up-ramp, down-ramp links).
RangeVars build_dispatch_range_stage(Model& model, const SystemData& sys,
                                     const CommitmentVars& commitment);

/// Appends one period's recourse polytope.  Generator output is bounded by
/// the range variables when `range_vars` is given, else by the fixed numbers
/// in `range_vals`.  The block's variable costs enter the objective scaled
/// by `cost_weight` and are also returned for cut rows.
DispatchBlock add_dispatch_block(Model& model, const SystemData& sys,
                                 const ShiftFactorMatrix& ptdf,
                                 const ForecastSeries& forecast,
                                 const std::vector<double>& w_t, int t,
                                 const RangeVars* range_vars,
                                 const DispatchRange* range_vals,
                                 double cost_weight);

/// Elastic variant: balance and line rows carry unit-cost slack variables
/// while bounds stay hard, so the LP is always feasible and its optimum
/// measures the recourse infeasibility in MW.
DispatchBlock add_elastic_dispatch_block(Model& model, const SystemData& sys,
                                         const ShiftFactorMatrix& ptdf,
                                         const ForecastSeries& forecast,
                                         const std::vector<double>& w_t, int t,
                                         const DispatchRange& range);

/// Deterministic UC for a known error vector w [unit][period].
DucModel build_duc(const SystemData& sys, const ForecastSeries& forecast,
                   const std::vector<std::vector<double>>& w);

/// Extensive-form stochastic UC over the sample set (one recourse copy per
/// sample, first stage in the dispatch-range set).
SucModel build_suc(const SystemData& sys, const ForecastSeries& forecast,
                   const SampleSet& samples);

/// Single-period economic dispatch at fixed ranges for the period-t error
/// vector w_t [unit].  Out-of-box w is solved as-is with the curtailment
/// ceiling clamped at zero.
DispatchResult rt_dispatch(const SystemData& sys, const DispatchRange& range,
                           const ForecastSeries& forecast,
                           const std::vector<double>& w_t, int t,
                           const ShiftFactorMatrix* ptdf = nullptr);

/// Second-stage cost f: sum of the T per-period dispatch optima.
SecondStageResult evaluate_second_stage(const SystemData& sys,
                                        const DispatchRange& range,
                                        const ForecastSeries& forecast,
                                        const std::vector<std::vector<double>>& w,
                                        const ShiftFactorMatrix* ptdf = nullptr);

CommitmentSchedule extract_schedule(const Solution& sol,
                                    const CommitmentVars& vars);
DispatchRange extract_range(const Solution& sol, const RangeVars& vars);

/// Fixed operating cost c1'u of a schedule.
double fixed_cost(const SystemData& sys, const CommitmentSchedule& schedule);

}  // namespace wdruc

#endif  // WDRUC_CORE_UC_HPP
