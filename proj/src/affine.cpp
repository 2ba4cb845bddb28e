#include "wdruc/affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdruc {

namespace {

constexpr double kWidthTol = 1e-12;

std::vector<std::vector<double>> zeros_like(int n, int T) {
  return std::vector<std::vector<double>>(n, std::vector<double>(T, 0.0));
}

struct PeriodGeometry {
  double m_lo = 0.0, m_hi = 0.0;  // range of the period-total error
  int effective = 0;              // coordinates with positive width
};

PeriodGeometry period_geometry(const OmegaBox& om, int t) {
  PeriodGeometry g;
  for (int r = 0; r < om.units(); ++r) {
    g.m_lo += om.lower[r][t];
    g.m_hi += om.upper[r][t];
    if (om.upper[r][t] - om.lower[r][t] > kWidthTol) ++g.effective;
  }
  return g;
}

}  // namespace

AffinePolicy AffinePolicy::zeros(const SystemData& sys) {
  AffinePolicy p;
  p.gen_slope = zeros_like(sys.num_generators(), sys.horizon);
  p.gen_icept = zeros_like(sys.num_generators(), sys.horizon);
  p.load_slope = zeros_like(sys.num_loads(), sys.horizon);
  p.load_icept = zeros_like(sys.num_loads(), sys.horizon);
  p.reg_slope = zeros_like(sys.num_reg_units(), sys.horizon);
  p.reg_icept = zeros_like(sys.num_reg_units(), sys.horizon);
  return p;
}

double CostFunctions::c1(const AffinePolicy& p, int t) const {
  double v = 0.0;
  for (std::size_t g = 0; g < gen_coeff.size(); ++g)
    v += gen_coeff[g] * p.gen_slope[g][t];
  for (std::size_t l = 0; l < load_coeff.size(); ++l)
    v += load_coeff[l] * p.load_slope[l][t];
  for (std::size_t r = 0; r < reg_coeff.size(); ++r)
    v += reg_coeff[r] * p.reg_slope[r][t];
  return v;
}

double CostFunctions::c0(const AffinePolicy& p, int t) const {
  double v = 0.0;
  for (std::size_t g = 0; g < gen_coeff.size(); ++g)
    v += gen_coeff[g] * p.gen_icept[g][t];
  for (std::size_t l = 0; l < load_coeff.size(); ++l)
    v += load_coeff[l] * p.load_icept[l][t];
  for (std::size_t r = 0; r < reg_coeff.size(); ++r)
    v += reg_coeff[r] * p.reg_icept[r][t];
  return v;
}

CostFunctions cost_coefficients(const SystemData& sys) {
  CostFunctions c;
  for (const auto& g : sys.generators) c.gen_coeff.push_back(g.marginal_cost);
  for (const auto& l : sys.loads)
    c.load_coeff.push_back(l.sheddable ? l.shed_cost : 0.0);
  for (const auto& r : sys.reg_units) c.reg_coeff.push_back(r.curtail_cost);
  return c;
}

std::string RobustConstraint::tag() const {
  static const char* names[] = {"gen_upper",     "gen_lower",    "shed_upper",
                                "shed_lower",    "curtail_upper", "curtail_lower",
                                "line_upper",    "line_lower"};
  return std::string(names[static_cast<int>(family)]) + "[" +
         std::to_string(entity) + "," + std::to_string(period + 1) + "]";
}

std::vector<RobustConstraint> affine_constraint_system(const SystemData& sys,
                                                       const OmegaBox& om) {
  std::vector<RobustConstraint> out;
  using F = RobustConstraint::Family;
  for (int t = 0; t < om.periods(); ++t) {
    for (int g = 0; g < sys.num_generators(); ++g) {
      out.push_back({F::gen_upper, g, t});
      out.push_back({F::gen_lower, g, t});
    }
    for (int l = 0; l < sys.num_loads(); ++l) {
      out.push_back({F::shed_upper, l, t});
      out.push_back({F::shed_lower, l, t});
    }
    for (int r = 0; r < sys.num_reg_units(); ++r) {
      out.push_back({F::curtail_upper, r, t});
      out.push_back({F::curtail_lower, r, t});
    }
    for (int ln = 0; ln < sys.num_lines(); ++ln) {
      out.push_back({F::line_upper, ln, t});
      out.push_back({F::line_lower, ln, t});
    }
  }
  return out;
}

namespace {

// Affine representation of one robust inequality: value(w) = base +
// sum_r coeff_r * w_r <= 0, evaluated from numeric policy and ranges.
struct ConstraintAffine {
  double base = 0.0;
  std::vector<double> coeff;  // per reg unit
};

ConstraintAffine constraint_affine(const SystemData& sys,
                                   const ShiftFactorMatrix& ptdf,
                                   const ForecastSeries& forecast,
                                   const AffinePolicy& p,
                                   const DispatchRange& range,
                                   const RobustConstraint& c) {
  using F = RobustConstraint::Family;
  const int t = c.period;
  const int R = sys.num_reg_units();
  ConstraintAffine out;
  out.coeff.assign(R, 0.0);
  switch (c.family) {
    case F::gen_upper: {
      const double a1 = p.gen_slope[c.entity][t];
      out.base = p.gen_icept[c.entity][t] - range.upper[c.entity][t];
      for (int r = 0; r < R; ++r) out.coeff[r] = a1;
      return out;
    }
    case F::gen_lower: {
      const double a1 = p.gen_slope[c.entity][t];
      out.base = range.lower[c.entity][t] - p.gen_icept[c.entity][t];
      for (int r = 0; r < R; ++r) out.coeff[r] = -a1;
      return out;
    }
    case F::shed_upper: {
      const double a1 = p.load_slope[c.entity][t];
      const auto& load = sys.loads[c.entity];
      out.base = p.load_icept[c.entity][t] -
                 (load.sheddable ? load.demand[t] : 0.0);
      for (int r = 0; r < R; ++r) out.coeff[r] = a1;
      return out;
    }
    case F::shed_lower: {
      const double a1 = p.load_slope[c.entity][t];
      out.base = -p.load_icept[c.entity][t];
      for (int r = 0; r < R; ++r) out.coeff[r] = -a1;
      return out;
    }
    case F::curtail_upper: {
      const double a1 = p.reg_slope[c.entity][t];
      out.base = p.reg_icept[c.entity][t] - forecast.value[c.entity][t];
      for (int r = 0; r < R; ++r) out.coeff[r] = a1;
      out.coeff[c.entity] -= 1.0;
      return out;
    }
    case F::curtail_lower: {
      const double a1 = p.reg_slope[c.entity][t];
      out.base = -p.reg_icept[c.entity][t];
      for (int r = 0; r < R; ++r) out.coeff[r] = -a1;
      return out;
    }
    case F::line_upper:
    case F::line_lower: {
      const double sign = c.family == F::line_upper ? 1.0 : -1.0;
      const int ln = c.entity;
      double slope_sum = 0.0;  // coefficient of the period total
      double base = 0.0;
      for (int g = 0; g < sys.num_generators(); ++g) {
        const double f = ptdf.at(sys.generators[g].bus, ln);
        slope_sum += f * p.gen_slope[g][t];
        base += f * p.gen_icept[g][t];
      }
      for (int l = 0; l < sys.num_loads(); ++l) {
        const double f = ptdf.at(sys.loads[l].bus, ln);
        slope_sum += f * p.load_slope[l][t];
        base += f * (p.load_icept[l][t] - sys.loads[l].demand[t]);
      }
      for (int r = 0; r < R; ++r) {
        const double f = ptdf.at(sys.reg_units[r].bus, ln);
        slope_sum -= f * p.reg_slope[r][t];
        base += f * (forecast.value[r][t] - p.reg_icept[r][t]);
      }
      out.base = sign * base - sys.lines[ln].capacity;
      for (int r = 0; r < R; ++r) {
        out.coeff[r] = sign * (slope_sum + ptdf.at(sys.reg_units[r].bus, ln));
      }
      return out;
    }
  }
  return out;
}

}  // namespace

std::vector<SeparationHit> separate(const SystemData& sys,
                                    const ForecastSeries& forecast,
                                    const AffinePolicy& policy,
                                    const DispatchRange& range,
                                    const OmegaBox& om, double tol) {
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  std::vector<SeparationHit> hits;
  for (const RobustConstraint& c : affine_constraint_system(sys, om)) {
    const ConstraintAffine aff =
        constraint_affine(sys, ptdf, forecast, policy, range, c);
    SeparationHit hit;
    hit.constraint = c;
    hit.witness.resize(om.units());
    double value = aff.base;
    for (int r = 0; r < om.units(); ++r) {
      // Coordinate-wise sign rule: the worst w is a box vertex.
      hit.witness[r] = aff.coeff[r] > 0 ? om.upper[r][c.period]
                                        : om.lower[r][c.period];
      value += aff.coeff[r] * hit.witness[r];
    }
    if (value > tol) {
      hit.violation = value;
      hits.push_back(std::move(hit));
    }
  }
  return hits;
}

bool CutPool::add_cut(const SeparationHit& hit) {
  for (const auto& existing : affine_cuts) {
    if (existing.constraint.family == hit.constraint.family &&
        existing.constraint.entity == hit.constraint.entity &&
        existing.constraint.period == hit.constraint.period) {
      bool same = true;
      for (std::size_t r = 0; r < hit.witness.size(); ++r)
        if (std::abs(existing.witness[r] - hit.witness[r]) > 1e-9) same = false;
      if (same) return false;
    }
  }
  affine_cuts.push_back(hit);
  return true;
}

bool CutPool::add_scenario(std::vector<std::vector<double>> w) {
  for (const auto& existing : recourse_scenarios) {
    bool same = true;
    for (std::size_t r = 0; r < w.size() && same; ++r)
      for (std::size_t t = 0; t < w[r].size() && same; ++t)
        if (std::abs(existing[r][t] - w[r][t]) > 1e-9) same = false;
    if (same) return false;
  }
  recourse_scenarios.push_back(std::move(w));
  return true;
}

namespace {

PolicyVars add_policy_variables(Model& m, const SystemData& sys) {
  PolicyVars v;
  const int T = sys.horizon;
  auto make = [&](int n, std::vector<std::vector<int>>& slot, const char* stem,
                  bool fixed_zero_if, const std::vector<char>& zero_mask) {
    slot.assign(n, std::vector<int>(T));
    for (int e = 0; e < n; ++e) {
      const bool zero = fixed_zero_if && zero_mask[e];
      for (int t = 0; t < T; ++t) {
        slot[e][t] = m.add_variable(zero ? 0.0 : -kInf, zero ? 0.0 : kInf,
                                    false, 0.0,
                                    std::string(stem) + "[" +
                                        std::to_string(e) + "," +
                                        std::to_string(t + 1) + "]");
      }
    }
  };
  std::vector<char> no_mask;
  std::vector<char> nonshed(sys.num_loads(), 0);
  for (int l = 0; l < sys.num_loads(); ++l)
    nonshed[l] = sys.loads[l].sheddable ? 0 : 1;
  make(sys.num_generators(), v.gen_slope, "ag1", false, no_mask);
  make(sys.num_generators(), v.gen_icept, "ag0", false, no_mask);
  make(sys.num_loads(), v.load_slope, "al1", true, nonshed);
  make(sys.num_loads(), v.load_icept, "al0", true, nonshed);
  make(sys.num_reg_units(), v.reg_slope, "ar1", false, no_mask);
  make(sys.num_reg_units(), v.reg_icept, "ar0", false, no_mask);
  return v;
}

// Linear master row for one robust inequality instantiated at witness w.
void emit_cut_row(Model& m, const SystemData& sys,
                  const ShiftFactorMatrix& ptdf, const ForecastSeries& forecast,
                  const PolicyVars& pv, const RangeVars& rv,
                  const RobustConstraint& c, const std::vector<double>& w) {
  using F = RobustConstraint::Family;
  const int t = c.period;
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
  switch (c.family) {
    case F::gen_upper:
      terms = {{pv.gen_slope[c.entity][t], total},
               {pv.gen_icept[c.entity][t], 1.0},
               {rv.upper[c.entity][t], -1.0}};
      break;
    case F::gen_lower:
      terms = {{pv.gen_slope[c.entity][t], -total},
               {pv.gen_icept[c.entity][t], -1.0},
               {rv.lower[c.entity][t], 1.0}};
      break;
    case F::shed_upper:
      terms = {{pv.load_slope[c.entity][t], total},
               {pv.load_icept[c.entity][t], 1.0}};
      rhs = sys.loads[c.entity].sheddable ? sys.loads[c.entity].demand[t] : 0.0;
      break;
    case F::shed_lower:
      terms = {{pv.load_slope[c.entity][t], -total},
               {pv.load_icept[c.entity][t], -1.0}};
      break;
    case F::curtail_upper:
      terms = {{pv.reg_slope[c.entity][t], total},
               {pv.reg_icept[c.entity][t], 1.0}};
      rhs = forecast.value[c.entity][t] + w[c.entity];
      break;
    case F::curtail_lower:
      terms = {{pv.reg_slope[c.entity][t], -total},
               {pv.reg_icept[c.entity][t], -1.0}};
      break;
    case F::line_upper:
    case F::line_lower: {
      const double sign = c.family == F::line_upper ? 1.0 : -1.0;
      const int ln = c.entity;
      double constant = 0.0;
      for (int g = 0; g < sys.num_generators(); ++g) {
        const double f = sign * ptdf.at(sys.generators[g].bus, ln);
        if (f != 0.0) {
          terms.emplace_back(pv.gen_slope[g][t], f * total);
          terms.emplace_back(pv.gen_icept[g][t], f);
        }
      }
      for (int l = 0; l < sys.num_loads(); ++l) {
        const double f = sign * ptdf.at(sys.loads[l].bus, ln);
        if (f != 0.0) {
          terms.emplace_back(pv.load_slope[l][t], f * total);
          terms.emplace_back(pv.load_icept[l][t], f);
          constant -= f * sys.loads[l].demand[t];
        }
      }
      for (int r = 0; r < sys.num_reg_units(); ++r) {
        const double f = sign * ptdf.at(sys.reg_units[r].bus, ln);
        if (f != 0.0) {
          terms.emplace_back(pv.reg_slope[r][t], -f * total);
          terms.emplace_back(pv.reg_icept[r][t], -f);
          constant += f * (forecast.value[r][t] + w[r]);
        }
      }
      rhs = sys.lines[ln].capacity - constant;
      break;
    }
  }
  m.add_constraint(terms, Relation::less_equal, rhs, c.tag());
}

}  // namespace

MasterModel build_master(const SystemData& sys, const ForecastSeries& forecast,
                         const SampleSet& samples, const WassersteinConfig& cfg,
                         const CutPool& cuts) {
  const UncertaintyBox wbox = uncertainty_box(sys, forecast);
  const OmegaBox om = omega(samples, cfg, wbox);
  const GvBounds gvb = gv_bounds(samples, om);
  const CostFunctions costs = cost_coefficients(sys);
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  const int T = sys.horizon;
  const int S = samples.count;

  MasterModel mm;
  Model& m = mm.model;
  mm.commitment = build_commitment_constraints(m, sys);
  mm.ranges = build_dispatch_range_stage(m, sys, mm.commitment);
  mm.policy = add_policy_variables(m, sys);

  // Sample-mean of the period-total error drives the g^c objective term.
  std::vector<double> mean_total(T, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s)
      for (int r = 0; r < sys.num_reg_units(); ++r)
        mean_total[t] += samples.error[s][r][t];
    mean_total[t] /= S;
  }
  for (int t = 0; t < T; ++t) {
    for (int g = 0; g < sys.num_generators(); ++g) {
      m.set_objective_coeff(mm.policy.gen_slope[g][t],
                            costs.gen_coeff[g] * mean_total[t]);
      m.set_objective_coeff(mm.policy.gen_icept[g][t], costs.gen_coeff[g]);
    }
    for (int l = 0; l < sys.num_loads(); ++l) {
      m.set_objective_coeff(mm.policy.load_slope[l][t],
                            costs.load_coeff[l] * mean_total[t]);
      m.set_objective_coeff(mm.policy.load_icept[l][t], costs.load_coeff[l]);
    }
    for (int r = 0; r < sys.num_reg_units(); ++r) {
      m.set_objective_coeff(mm.policy.reg_slope[r][t],
                            costs.reg_coeff[r] * mean_total[t]);
      m.set_objective_coeff(mm.policy.reg_icept[r][t], costs.reg_coeff[r]);
    }
  }

  // Worst-case-expectation dual block: eps*xi + sum_t (zbar+ xi+ + zbar- xi-)
  // with the two dual-feasibility rows per period.
  mm.xi = m.add_variable(0.0, kInf, false, cfg.epsilon, "xi");
  mm.xi_plus.resize(T);
  mm.xi_minus.resize(T);
  for (int t = 0; t < T; ++t) {
    mm.xi_plus[t] = m.add_variable(0.0, kInf, false, gvb.plus[t]);
    mm.xi_minus[t] = m.add_variable(0.0, kInf, false, gvb.minus[t]);
    std::vector<std::pair<int, double>> plus{{mm.xi, 1.0},
                                             {mm.xi_plus[t], double(S)}};
    std::vector<std::pair<int, double>> minus{{mm.xi, 1.0},
                                              {mm.xi_minus[t], double(S)}};
    for (int g = 0; g < sys.num_generators(); ++g) {
      plus.emplace_back(mm.policy.gen_slope[g][t], -costs.gen_coeff[g]);
      minus.emplace_back(mm.policy.gen_slope[g][t], costs.gen_coeff[g]);
    }
    for (int l = 0; l < sys.num_loads(); ++l) {
      plus.emplace_back(mm.policy.load_slope[l][t], -costs.load_coeff[l]);
      minus.emplace_back(mm.policy.load_slope[l][t], costs.load_coeff[l]);
    }
    for (int r = 0; r < sys.num_reg_units(); ++r) {
      plus.emplace_back(mm.policy.reg_slope[r][t], -costs.reg_coeff[r]);
      minus.emplace_back(mm.policy.reg_slope[r][t], costs.reg_coeff[r]);
    }
    m.add_constraint(plus, Relation::greater_equal, 0.0);
    m.add_constraint(minus, Relation::greater_equal, 0.0);
  }

  // Balance as coefficient matching: with at least one effective error
  // coordinate the slope identity and the intercept identity must both
  // hold; a fully degenerate period collapses to the balance evaluated at
  // its fixed total.
  for (int t = 0; t < T; ++t) {
    const PeriodGeometry geom = period_geometry(om, t);
    double demand = 0.0, wf = 0.0;
    for (const auto& load : sys.loads) demand += load.demand[t];
    for (int r = 0; r < sys.num_reg_units(); ++r) wf += forecast.value[r][t];
    if (geom.effective >= 1) {
      std::vector<std::pair<int, double>> slope;
      for (int g = 0; g < sys.num_generators(); ++g)
        slope.emplace_back(mm.policy.gen_slope[g][t], 1.0);
      for (int l = 0; l < sys.num_loads(); ++l)
        slope.emplace_back(mm.policy.load_slope[l][t], 1.0);
      for (int r = 0; r < sys.num_reg_units(); ++r)
        slope.emplace_back(mm.policy.reg_slope[r][t], -1.0);
      m.add_constraint(slope, Relation::equal, -1.0);

      std::vector<std::pair<int, double>> icept;
      for (int g = 0; g < sys.num_generators(); ++g)
        icept.emplace_back(mm.policy.gen_icept[g][t], 1.0);
      for (int l = 0; l < sys.num_loads(); ++l)
        icept.emplace_back(mm.policy.load_icept[l][t], 1.0);
      for (int r = 0; r < sys.num_reg_units(); ++r)
        icept.emplace_back(mm.policy.reg_icept[r][t], -1.0);
      m.add_constraint(icept, Relation::equal, demand - wf);
    } else {
      const double fixed_total = geom.m_lo;  // m_lo == m_hi here
      std::vector<std::pair<int, double>> row;
      for (int g = 0; g < sys.num_generators(); ++g) {
        row.emplace_back(mm.policy.gen_slope[g][t], fixed_total);
        row.emplace_back(mm.policy.gen_icept[g][t], 1.0);
      }
      for (int l = 0; l < sys.num_loads(); ++l) {
        row.emplace_back(mm.policy.load_slope[l][t], fixed_total);
        row.emplace_back(mm.policy.load_icept[l][t], 1.0);
      }
      for (int r = 0; r < sys.num_reg_units(); ++r) {
        row.emplace_back(mm.policy.reg_slope[r][t], -fixed_total);
        row.emplace_back(mm.policy.reg_icept[r][t], -1.0);
      }
      m.add_constraint(row, Relation::equal, demand - wf - fixed_total);
    }
  }

  // Families whose w-dependence is through the period total alone are
  // enforced exactly by rows at the two total extremes (linear in the
  // total on an interval).  Coordinate-coupled families (curtailment
  // ceiling and line limits) are handled by the accumulated cuts.
  using F = RobustConstraint::Family;
  for (int t = 0; t < T; ++t) {
    std::vector<std::vector<double>> extremes;
    std::vector<double> lo(sys.num_reg_units()), hi(sys.num_reg_units());
    for (int r = 0; r < sys.num_reg_units(); ++r) {
      lo[r] = om.lower[r][t];
      hi[r] = om.upper[r][t];
    }
    extremes.push_back(lo);
    const PeriodGeometry geom = period_geometry(om, t);
    if (geom.m_hi - geom.m_lo > kWidthTol) extremes.push_back(hi);
    for (const auto& w : extremes) {
      for (int g = 0; g < sys.num_generators(); ++g) {
        emit_cut_row(m, sys, ptdf, forecast, mm.policy, mm.ranges,
                     {F::gen_upper, g, t}, w);
        emit_cut_row(m, sys, ptdf, forecast, mm.policy, mm.ranges,
                     {F::gen_lower, g, t}, w);
      }
      for (int l = 0; l < sys.num_loads(); ++l) {
        if (!sys.loads[l].sheddable) continue;  // variables fixed at zero
        emit_cut_row(m, sys, ptdf, forecast, mm.policy, mm.ranges,
                     {F::shed_upper, l, t}, w);
        emit_cut_row(m, sys, ptdf, forecast, mm.policy, mm.ranges,
                     {F::shed_lower, l, t}, w);
      }
      for (int r = 0; r < sys.num_reg_units(); ++r) {
        emit_cut_row(m, sys, ptdf, forecast, mm.policy, mm.ranges,
                     {F::curtail_lower, r, t}, w);
      }
    }
  }

  // Accumulated separation cuts.
  for (const SeparationHit& hit : cuts.affine_cuts)
    emit_cut_row(m, sys, ptdf, forecast, mm.policy, mm.ranges, hit.constraint,
                 hit.witness);

  // Recourse scenario blocks over the physical box.
  std::vector<double> w_t(sys.num_reg_units());
  for (const auto& scenario : cuts.recourse_scenarios) {
    for (int t = 0; t < T; ++t) {
      for (int r = 0; r < sys.num_reg_units(); ++r) w_t[r] = scenario[r][t];
      add_dispatch_block(m, sys, ptdf, forecast, w_t, t, &mm.ranges, nullptr,
                         0.0);
    }
  }
  return mm;
}

AffinePolicy extract_policy(const Solution& sol, const PolicyVars& vars) {
  AffinePolicy p;
  auto take = [&](const std::vector<std::vector<int>>& ids) {
    std::vector<std::vector<double>> out(ids.size());
    for (std::size_t e = 0; e < ids.size(); ++e)
      for (int id : ids[e]) out[e].push_back(sol.value(id));
    return out;
  };
  p.gen_slope = take(vars.gen_slope);
  p.gen_icept = take(vars.gen_icept);
  p.load_slope = take(vars.load_slope);
  p.load_icept = take(vars.load_icept);
  p.reg_slope = take(vars.reg_slope);
  p.reg_icept = take(vars.reg_icept);
  return p;
}

AwdrucSolution solve_awdruc(const SystemData& sys,
                            const ForecastSeries& forecast,
                            const SampleSet& samples,
                            const WassersteinConfig& cfg,
                            const AwdrucOptions& opts) {
  const UncertaintyBox wbox = uncertainty_box(sys, forecast);
  validate_samples(samples, wbox);
  const OmegaBox om = omega(samples, cfg, wbox);

  CutPool pool;
  AwdrucSolution out;
  for (int iter = 1; iter <= opts.max_outer_iter; ++iter) {
    out.iterations = iter;
    MasterModel master = build_master(sys, forecast, samples, cfg, pool);
    const Solution sol = solve(master.model, opts.robust.solve);
    out.master_rows = master.model.num_constraints();
    out.master_cols = master.model.num_variables();
    if (sol.status != SolveStatus::optimal) {
      out.status = sol.status;
      return out;
    }
    out.schedule = extract_schedule(sol, master.commitment);
    out.range = extract_range(sol, master.ranges);
    out.policy = extract_policy(sol, master.policy);
    out.objective = sol.objective;
    out.status = SolveStatus::optimal;

    // (7b): closed-form separation of the robust affine constraints.
    const auto hits = separate(sys, forecast, out.policy, out.range, om,
                               opts.separation_tol);
    bool added_cut = false;
    for (const auto& hit : hits) added_cut = pool.add_cut(hit) || added_cut;

    // (4b): recourse feasibility over the physical box.
    const FeasibilityResult feas =
        feasibility_subproblem(sys, out.range, forecast, wbox, opts.robust);
    bool added_scenario = false;
    if (feas.violation > opts.robust.feas_tol)
      added_scenario = pool.add_scenario(feas.witness);

    out.affine_cut_count = static_cast<int>(pool.affine_cuts.size());
    out.feasibility_cut_count = static_cast<int>(pool.recourse_scenarios.size());
    out.certified_affine = hits.empty();
    out.certified_recourse = feas.violation <= opts.robust.feas_tol;
    if (out.certified()) return out;
    if (!added_cut && !added_scenario) {
      // Violations persist but every witness is already pooled; a repeat
      // master solve cannot improve, so report the uncertified state.
      out.status = SolveStatus::limit;
      return out;
    }
  }
  out.status = SolveStatus::limit;
  return out;
}

EvaluationReport evaluate_awdruc(
    const AwdrucSolution& solution, const SystemData& sys,
    const ForecastSeries& forecast,
    const std::vector<std::vector<std::vector<double>>>& eval_scenarios) {
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  EvaluationReport rep;
  rep.scenario_cost.reserve(eval_scenarios.size());
  double feasible_total = 0.0;
  int feasible_count = 0;
  for (const auto& w : eval_scenarios) {
    const SecondStageResult r =
        evaluate_second_stage(sys, solution.range, forecast, w, &ptdf);
    if (!r.feasible) {
      ++rep.infeasible_scenarios;
      rep.scenario_cost.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double total = fixed_cost(sys, solution.schedule) + r.cost;
    rep.scenario_cost.push_back(total);
    feasible_total += total;
    ++feasible_count;
  }
  rep.mean_cost = feasible_count > 0 ? feasible_total / feasible_count : 0.0;
  return rep;
}

}  // namespace wdruc
