#ifndef WDRUC_AFFINE_HPP
#define WDRUC_AFFINE_HPP

#include <string>
#include <vector>

#include "wdruc/affine_policy.hpp"
#include "wdruc/core_uc.hpp"
#include "wdruc/robust.hpp"
#include "wdruc/wasserstein.hpp"

namespace wdruc {

/// One robust inequality of the affine recourse set: a linear function of
/// the master variables and of w that must stay <= 0 for every w in the
/// support.  Coefficients are derived from the system on demand; only the
/// family tag, entity and period are stored.
struct RobustConstraint {
  enum class Family {
    gen_upper,      // policy output above the dispatch-range ceiling
    gen_lower,      // policy output below the dispatch-range floor
    shed_upper,     // shed policy above demand
    shed_lower,     // shed policy negative
    curtail_upper,  // curtail policy above available REG output
    curtail_lower,  // curtail policy negative
    line_upper,     // flow above capacity
    line_lower      // flow below -capacity
  };
  Family family;
  int entity = 0;  // generator / load / reg unit / line index
  int period = 0;

  std::string tag() const;
};

struct SeparationHit {
  RobustConstraint constraint;
  std::vector<double> witness;  // w_t per unit
  double violation = 0.0;       // MW-scaled
};

/// Variable ids of the affine policy inside a master model.
struct PolicyVars {
  std::vector<std::vector<int>> gen_slope, gen_icept;    // [G][T]
  std::vector<std::vector<int>> load_slope, load_icept;  // [loads][T]
  std::vector<std::vector<int>> reg_slope, reg_icept;    // [R][T]
};

struct AwdrucOptions {
  RobustOptions robust;          // solver, C&CG gap, feasibility tolerance
  double separation_tol = 1e-6;  // MW
  int max_outer_iter = 100;
};

/// Accumulated cutting state of the outer loop.
struct CutPool {
  std::vector<SeparationHit> affine_cuts;
  std::vector<std::vector<std::vector<double>>> recourse_scenarios;  // over W

  bool add_cut(const SeparationHit& hit);
  bool add_scenario(std::vector<std::vector<double>> w);
};

struct MasterModel {
  Model model;
  CommitmentVars commitment;
  RangeVars ranges;
  PolicyVars policy;
  int xi = -1;
  std::vector<int> xi_plus, xi_minus;  // [T]
};

struct AwdrucSolution {
  SolveStatus status = SolveStatus::limit;
  CommitmentSchedule schedule;
  DispatchRange range;
  AffinePolicy policy;
  double objective = 0.0;
  int iterations = 0;
  int affine_cut_count = 0;
  int feasibility_cut_count = 0;
  bool certified_affine = false;    // no robust inequality violated over omega
  bool certified_recourse = false;  // (4b) feasible over the physical box
  int master_rows = 0, master_cols = 0;

  bool certified() const { return certified_affine && certified_recourse; }
};

struct EvaluationReport {
  double mean_cost = 0.0;
  int infeasible_scenarios = 0;
  std::vector<double> scenario_cost;  // NaN where infeasible
};

/// Every robust inequality family over the given support, enumerated in a
/// deterministic order.
std::vector<RobustConstraint> affine_constraint_system(const SystemData& sys,
                                                       const OmegaBox& om);

/// Exact closed-form separation: evaluates each robust inequality's worst
/// case over the box coordinate-wise and returns all violations above tol.
std::vector<SeparationHit> separate(const SystemData& sys,
                                    const ForecastSeries& forecast,
                                    const AffinePolicy& policy,
                                    const DispatchRange& range,
                                    const OmegaBox& om, double tol = 1e-6);

/// The sample-size-invariant master MILP: commitment, ranges, policy
/// variables, the dualized worst-case-expectation rows, balance coefficient
/// matching, and all accumulated cuts.  Sample data enters only through
/// objective coefficients and the gv budget bounds.
MasterModel build_master(const SystemData& sys, const ForecastSeries& forecast,
                         const SampleSet& samples, const WassersteinConfig& cfg,
                         const CutPool& cuts);

/// Outer loop: master solve, closed-form separation over omega, recourse
/// feasibility generation over the physical box, until certified.
AwdrucSolution solve_awdruc(const SystemData& sys,
                            const ForecastSeries& forecast,
                            const SampleSet& samples,
                            const WassersteinConfig& cfg,
                            const AwdrucOptions& opts = {});

/// Out-of-sample evaluation with exact recourse; the affine policy is not
/// used for dispatch.
EvaluationReport evaluate_awdruc(const AwdrucSolution& solution,
                                 const SystemData& sys,
                                 const ForecastSeries& forecast,
                                 const std::vector<std::vector<std::vector<double>>>&
                                     eval_scenarios);

AffinePolicy extract_policy(const Solution& sol, const PolicyVars& vars);

}  // namespace wdruc

#endif  // WDRUC_AFFINE_HPP
