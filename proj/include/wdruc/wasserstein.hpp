#ifndef WDRUC_WASSERSTEIN_HPP
#define WDRUC_WASSERSTEIN_HPP

#include <string>
#include <vector>

#include "wdruc/affine_policy.hpp"
#include "wdruc/core_uc.hpp"
#include "wdruc/robust.hpp"
#include "wdruc/system.hpp"

namespace wdruc {

struct WassersteinConfig {
  double epsilon = 0.0;  // Wasserstein radius, MW mass-transport units
  double beta = 100.0;   // worst-case confidence parameter, > 1
};

/// Support of the ambiguity set: intersection of the physical error box
/// with the sample hull widened by epsilon * max(S, beta).
struct OmegaBox {
  std::vector<std::vector<double>> lower, upper;  // [unit][period]
  // Unclipped analytic bounds (sample hull +- widening), kept for the
  // worst-case-confidence witness.
  std::vector<std::vector<double>> analytic_lower, analytic_upper;

  int units() const { return static_cast<int>(lower.size()); }
  int periods() const { return lower.empty() ? 0 : static_cast<int>(lower[0].size()); }
  UncertaintyBox as_box() const;
};

/// Per-period aggregated deviation budgets (MW * samples).
struct GvBounds {
  std::vector<double> plus, minus;  // [T], both >= 0
};

struct DiscreteDistribution {
  std::vector<std::vector<std::vector<double>>> atom;  // [k][unit][period]
  std::vector<double> probability;
};

struct Theorem1Witness {
  bool constructed = false;
  std::string skip_reason;
  DiscreteDistribution distribution;
  double transport_cost = 0.0;
  double mass_outside = 0.0;  // outside the open analytic box
};

struct GvDual {
  double value = 0.0;
  double xi = 0.0;
  std::vector<double> xi_plus, xi_minus;  // [T]
};

struct EwdrucSolution {
  SolveStatus status = SolveStatus::limit;
  CommitmentSchedule schedule;
  DispatchRange range;
  double lambda = 0.0;
  double objective = 0.0;    // best upper bound
  double lower_bound = 0.0;  // master bound
  int iterations = 0;
  int pool_size = 0;
  bool certified = false;
  int master_rows = 0, master_cols = 0;
  std::vector<double> lower_history, upper_history;
};

void validate_samples(const SampleSet& samples, const UncertaintyBox& box);

/// Samples CSV: columns scenario_id, reg_unit_id, period, error_mw
/// (1-based ids in the file).  Samples outside the physical box are
/// rejected.
SampleSet load_samples(const std::string& path, const SystemData& sys,
                       const UncertaintyBox& box);
void save_samples(const std::string& path, const SystemData& sys,
                  const SampleSet& samples);

OmegaBox omega(const SampleSet& samples, const WassersteinConfig& cfg,
               const UncertaintyBox& box);

/// Constructs the proof-style worst-case distribution: the sample atom
/// nearest an analytic boundary sends mass min(1, S/beta)/S to it.  Skips
/// with a reason when the physical box clips the target.
Theorem1Witness theorem1_witness(const SampleSet& samples,
                                 const WassersteinConfig& cfg,
                                 const UncertaintyBox& box);

/// 1-Wasserstein distance with 1-norm ground cost via the transport LP.
double wasserstein_distance_discrete(const DiscreteDistribution& p,
                                     const DiscreteDistribution& q);

GvBounds gv_bounds(const SampleSet& samples, const OmegaBox& om);

/// Optimal value of the aggregated budget LP given per-period cost slopes.
double gv_primal(const std::vector<double>& c1, const GvBounds& bounds,
                 double epsilon, int S);

/// Pre-aggregation form over per-(unit, sample, period) deviations; used
/// as an oracle for the aggregation step.
double gv_disaggregated(const std::vector<double>& c1, const SampleSet& samples,
                        const OmegaBox& om, double epsilon);

/// LP dual of gv_primal; value coincides by strong duality.
GvDual gv_dual(const std::vector<double>& c1, const GvBounds& bounds,
               double epsilon, int S);

/// Sample-mean cost term of the affine policy objective.
double gc(const AffinePolicy& policy, const SampleSet& samples,
          const CostFunctions& costs);

/// Exact distributionally robust UC by column-and-constraint generation on
/// the per-sample epigraph constraints over the omega support.
EwdrucSolution solve_ewdruc(const SystemData& sys,
                            const ForecastSeries& forecast,
                            const SampleSet& samples,
                            const WassersteinConfig& cfg,
                            const RobustOptions& opts = {});

}  // namespace wdruc

#endif  // WDRUC_WASSERSTEIN_HPP
