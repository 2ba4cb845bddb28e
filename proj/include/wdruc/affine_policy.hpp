#ifndef WDRUC_AFFINE_POLICY_HPP
#define WDRUC_AFFINE_POLICY_HPP

#include <vector>

#include "wdruc/system.hpp"

namespace wdruc {

/// Affine recourse policies: each dispatch quantity is slope * (period
/// total forecast error) + intercept.  Entries exist per generator, per
/// load (zero rows for non-sheddable loads), and per REG unit.
struct AffinePolicy {
  std::vector<std::vector<double>> gen_slope, gen_icept;    // [G][T]
  std::vector<std::vector<double>> load_slope, load_icept;  // [loads][T]
  std::vector<std::vector<double>> reg_slope, reg_icept;    // [R][T]

  static AffinePolicy zeros(const SystemData& sys);

  double gen_at(int g, int t, double total_error) const {
    return gen_slope[g][t] * total_error + gen_icept[g][t];
  }
  double load_at(int l, int t, double total_error) const {
    return load_slope[l][t] * total_error + load_icept[l][t];
  }
  double reg_at(int r, int t, double total_error) const {
    return reg_slope[r][t] * total_error + reg_icept[r][t];
  }
};

/// Coefficient vectors of the linear maps c1_t(a1_t) and c0_t(a0_t)
/// obtained by substituting the affine policies into the variable-cost
/// term and collecting the period-total-error coefficient.
struct CostFunctions {
  std::vector<double> gen_coeff;   // [G]   marginal generation cost
  std::vector<double> load_coeff;  // [loads] shedding cost (0 if fixed)
  std::vector<double> reg_coeff;   // [R]   curtailment cost

  double c1(const AffinePolicy& p, int t) const;
  double c0(const AffinePolicy& p, int t) const;
};

/// Builds the cost-coefficient vectors from the system data.
CostFunctions cost_coefficients(const SystemData& sys);

}  // namespace wdruc

#endif  // WDRUC_AFFINE_POLICY_HPP
