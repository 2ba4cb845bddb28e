#include "wdruc/robust.hpp"

#include <algorithm>
#include <cmath>

namespace wdruc {

namespace {

constexpr double kWidthTol = 1e-12;

bool same_scenario(const std::vector<std::vector<double>>& a,
                   const std::vector<std::vector<double>>& b) {
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t t = 0; t < a[r].size(); ++t)
      if (std::abs(a[r][t] - b[r][t]) > 1e-9) return false;
  return true;
}

int effective_dims(const UncertaintyBox& box, int t) {
  int k = 0;
  for (int r = 0; r < box.units(); ++r)
    if (box.upper[r][t] - box.lower[r][t] > kWidthTol) ++k;
  return k;
}

}  // namespace

bool ScenarioPool::add(std::vector<std::vector<double>> w,
                       bool feasibility_cut) {
  for (const auto& e : entries)
    if (same_scenario(e.w, w)) return false;
  entries.push_back(Entry{std::move(w), feasibility_cut});
  return true;
}

namespace internal {

long for_each_period_vertex(
    const UncertaintyBox& box, int t,
    const std::function<void(const std::vector<double>&)>& fn) {
  const int R = box.units();
  std::vector<int> eff;
  std::vector<double> w(R);
  for (int r = 0; r < R; ++r) {
    w[r] = box.lower[r][t];
    if (box.upper[r][t] - box.lower[r][t] > kWidthTol) eff.push_back(r);
  }
  const long count = 1L << eff.size();
  for (long mask = 0; mask < count; ++mask) {
    for (std::size_t k = 0; k < eff.size(); ++k) {
      const int r = eff[k];
      w[r] = (mask >> k) & 1 ? box.upper[r][t] : box.lower[r][t];
    }
    fn(w);
  }
  return count;
}

PeriodWorst period_worst_dual_milp(const SystemData& sys,
                                   const DispatchRange& range,
                                   const ForecastSeries& forecast,
                                   const UncertaintyBox& box, int t,
                                   bool elastic, const RobustOptions& opts) {
  const int G = sys.num_generators();
  const int L = sys.num_loads();
  const int R = sys.num_reg_units();
  const int nlines = sys.num_lines();
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);

  // Primal period LP data: columns j = xg | xl | xr | slacks with costs
  // c_j and bounds [lo_j, hi_j(w)]; one balance equality and 2*nlines
  // inequality rows whose rhs is affine in w.  The LP dual is maximized
  // jointly with vertex binaries z_r; dual-times-z products are linearized
  // with big-M envelopes.
  const int nx = G + L + R;
  std::vector<double> c(nx, 0.0), lo(nx, 0.0), hi0(nx, 0.0);
  for (int g = 0; g < G; ++g) {
    if (!elastic) c[g] = sys.generators[g].marginal_cost;
    lo[g] = std::min(range.lower[g][t], range.upper[g][t]);
    hi0[g] = std::max(range.lower[g][t], range.upper[g][t]);
  }
  for (int l = 0; l < L; ++l) {
    const auto& load = sys.loads[l];
    if (!elastic) c[G + l] = load.shed_cost;
    hi0[G + l] = load.sheddable ? load.demand[t] : 0.0;
  }
  std::vector<double> delta(R, 0.0), wlow(R, 0.0);
  for (int r = 0; r < R; ++r) {
    if (!elastic) c[G + L + r] = sys.reg_units[r].curtail_cost;
    wlow[r] = box.lower[r][t];
    delta[r] = box.upper[r][t] - box.lower[r][t];
    hi0[G + L + r] = forecast.value[r][t] + wlow[r];  // + delta_r z_r
  }

  // Balance: e'x = b0 - sum_r delta_r z_r  (e: +1 gen/shed, -1 curtail).
  std::vector<double> e(nx, 1.0);
  for (int r = 0; r < R; ++r) e[G + L + r] = -1.0;
  double b0 = 0.0;
  for (int l = 0; l < L; ++l) b0 += sys.loads[l].demand[t];
  for (int r = 0; r < R; ++r) b0 -= forecast.value[r][t] + wlow[r];

  // Inequality rows a_i'x <= u_i(w) = u0_i + sum_r g_ir z_r.
  const int ni = 2 * nlines;
  std::vector<std::vector<double>> a(ni, std::vector<double>(nx, 0.0));
  std::vector<double> u0(ni, 0.0);
  std::vector<std::vector<double>> gcoef(ni, std::vector<double>(R, 0.0));
  for (int ln = 0; ln < nlines; ++ln) {
    double phi0 = 0.0;
    for (int l = 0; l < L; ++l)
      phi0 -= ptdf.at(sys.loads[l].bus, ln) * sys.loads[l].demand[t];
    for (int r = 0; r < R; ++r)
      phi0 += ptdf.at(sys.reg_units[r].bus, ln) *
              (forecast.value[r][t] + wlow[r]);
    for (int pos = 0; pos < 2; ++pos) {
      const int i = 2 * ln + pos;
      const double sign = pos == 0 ? 1.0 : -1.0;  // +: flow <= cap, -: -flow <= cap
      for (int g = 0; g < G; ++g)
        a[i][g] = sign * ptdf.at(sys.generators[g].bus, ln);
      for (int l = 0; l < L; ++l)
        a[i][G + l] = sign * ptdf.at(sys.loads[l].bus, ln);
      for (int r = 0; r < R; ++r)
        a[i][G + L + r] = -sign * ptdf.at(sys.reg_units[r].bus, ln);
      u0[i] = sys.lines[ln].capacity - sign * phi0;
      for (int r = 0; r < R; ++r)
        gcoef[i][r] = -sign * ptdf.at(sys.reg_units[r].bus, ln) * delta[r];
    }
  }

  // Big-M from the data scale (heuristic; the enumeration path is
  // authoritative where it applies).
  double max_c = 1.0, max_rhs = 1.0;
  for (double v : c) max_c = std::max(max_c, std::abs(v));
  max_rhs = std::max(max_rhs, std::abs(b0));
  for (double v : u0) max_rhs = std::max(max_rhs, std::abs(v));
  for (double v : hi0) max_rhs = std::max(max_rhs, std::abs(v));
  const double M = 10.0 * (max_c + max_rhs);
  // Elastic slack columns bound the balance and line duals by their unit
  // cost; otherwise only the big-M heuristic applies.
  const double nu_cap = elastic ? 1.0 : M;
  const double pi_cap = elastic ? 1.0 : M;

  Model m(Sense::maximize);
  const int nu = m.add_variable(-nu_cap, nu_cap, false, b0, "nu");
  std::vector<int> pi(ni), rp(nx), rm(nx), z(R);
  for (int i = 0; i < ni; ++i) pi[i] = m.add_variable(0.0, pi_cap, false, -u0[i]);
  for (int j = 0; j < nx; ++j) {
    rp[j] = m.add_variable(0.0, M, false, lo[j]);
    rm[j] = m.add_variable(0.0, M, false, -hi0[j]);
  }
  for (int r = 0; r < R; ++r) z[r] = m.add_variable(0, 1, true, 0.0);

  // Dual feasibility: rp_j - rm_j = c_j - nu e_j - sum_i pi_i a_ij.
  for (int j = 0; j < nx; ++j) {
    std::vector<std::pair<int, double>> terms{{rp[j], 1.0}, {rm[j], -1.0},
                                              {nu, e[j]}};
    for (int i = 0; i < ni; ++i)
      if (a[i][j] != 0.0) terms.emplace_back(pi[i], a[i][j]);
    m.add_constraint(terms, Relation::equal, c[j]);
  }

  auto product = [&](int dvar, double dlo, double dhi, double obj_coeff,
                     int zvar) {
    const int y = m.add_variable(std::min(0.0, dlo), std::max(0.0, dhi), false,
                                 obj_coeff);
    m.add_constraint({{y, 1.0}, {zvar, -dhi}}, Relation::less_equal, 0.0);
    m.add_constraint({{y, 1.0}, {zvar, -dlo}}, Relation::greater_equal, 0.0);
    m.add_constraint({{y, 1.0}, {dvar, -1.0}, {zvar, -dlo}},
                     Relation::less_equal, -dlo);
    m.add_constraint({{y, 1.0}, {dvar, -1.0}, {zvar, -dhi}},
                     Relation::greater_equal, -dhi);
  };

  for (int r = 0; r < R; ++r) {
    if (delta[r] <= kWidthTol) continue;
    // nu z_r from the balance rhs, pi_i z_r from line rhs, and
    // rm_{xr} z_r from the curtailment ceiling.
    product(nu, -nu_cap, nu_cap, -delta[r], z[r]);
    for (int i = 0; i < ni; ++i)
      if (gcoef[i][r] != 0.0) product(pi[i], 0.0, pi_cap, -gcoef[i][r], z[r]);
    product(rm[G + L + r], 0.0, M, -delta[r], z[r]);
  }

  SolveParams sp = opts.solve;
  sp.mip_gap = std::min(sp.mip_gap, 1e-6);
  const Solution sol = solve(m, sp);
  if (sol.status != SolveStatus::optimal)
    throw SolverError("dualized worst-case subproblem did not solve: " +
                      std::string(to_string(sol.status)));
  PeriodWorst out;
  out.value = sol.objective;
  out.w_t.resize(R);
  for (int r = 0; r < R; ++r)
    out.w_t[r] = wlow[r] + delta[r] * std::round(sol.value(z[r]));
  // Dual objectives at the big-M ceiling signal an infeasible recourse.
  if (!elastic && out.value > M * std::max(1.0, max_rhs) * 0.5)
    out.recourse_feasible = false;
  return out;
}

}  // namespace internal

double elastic_dispatch_violation(const SystemData& sys,
                                  const DispatchRange& range,
                                  const ForecastSeries& forecast,
                                  const std::vector<double>& w_t, int t,
                                  const ShiftFactorMatrix* ptdf_in) {
  ShiftFactorMatrix local;
  const ShiftFactorMatrix* ptdf = ptdf_in;
  if (!ptdf) {
    local = compute_ptdf(sys);
    ptdf = &local;
  }
  Model m;
  add_elastic_dispatch_block(m, sys, *ptdf, forecast, w_t, t, range);
  SolveParams params;
  params.backend = Backend::builtin;
  const Solution sol = solve(m, params);
  if (sol.status != SolveStatus::optimal)
    throw SolverError("elastic dispatch LP did not solve: " +
                      std::string(to_string(sol.status)));
  return sol.objective;
}

WorstCaseResult worst_case_cost(const SystemData& sys,
                                const DispatchRange& range,
                                const ForecastSeries& forecast,
                                const UncertaintyBox& box,
                                const RobustOptions& opts) {
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  WorstCaseResult out;
  out.witness.assign(sys.num_reg_units(),
                     std::vector<double>(sys.horizon, 0.0));
  for (int t = 0; t < sys.horizon; ++t) {
    double best = -kInf;
    std::vector<double> best_w;
    bool found_infeasible = false;
    std::vector<double> infeasible_w;
    if (effective_dims(box, t) <= opts.max_enum_dims) {
      internal::for_each_period_vertex(box, t, [&](const std::vector<double>& w) {
        if (found_infeasible) return;
        const DispatchResult d = rt_dispatch(sys, range, forecast, w, t, &ptdf);
        if (!d.feasible) {
          found_infeasible = true;
          infeasible_w = w;
          return;
        }
        if (d.cost > best) {
          best = d.cost;
          best_w = w;
        }
      });
    } else {
      const auto pw = internal::period_worst_dual_milp(sys, range, forecast,
                                                       box, t, false, opts);
      if (!pw.recourse_feasible) {
        found_infeasible = true;
        infeasible_w = pw.w_t;
      } else {
        best = pw.value;
        best_w = pw.w_t;
      }
    }
    if (found_infeasible) {
      out.recourse_feasible = false;
      for (int r = 0; r < sys.num_reg_units(); ++r)
        out.witness[r][t] = infeasible_w[r];
      continue;
    }
    out.cost += best;
    for (int r = 0; r < sys.num_reg_units(); ++r) out.witness[r][t] = best_w[r];
  }
  return out;
}

FeasibilityResult feasibility_subproblem(const SystemData& sys,
                                         const DispatchRange& range,
                                         const ForecastSeries& forecast,
                                         const UncertaintyBox& box,
                                         const RobustOptions& opts) {
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  FeasibilityResult out;
  out.witness.assign(sys.num_reg_units(),
                     std::vector<double>(sys.horizon, 0.0));
  for (int t = 0; t < sys.horizon; ++t) {
    double worst = -kInf;
    std::vector<double> worst_w;
    if (effective_dims(box, t) <= opts.max_enum_dims) {
      internal::for_each_period_vertex(box, t, [&](const std::vector<double>& w) {
        const double v =
            elastic_dispatch_violation(sys, range, forecast, w, t, &ptdf);
        if (v > worst) {
          worst = v;
          worst_w = w;
        }
      });
    } else {
      const auto pw = internal::period_worst_dual_milp(sys, range, forecast,
                                                       box, t, true, opts);
      worst = pw.value;
      worst_w = pw.w_t;
    }
    for (int r = 0; r < sys.num_reg_units(); ++r) out.witness[r][t] = worst_w[r];
    if (worst > out.violation) {
      out.violation = worst;
      out.worst_period = t;
    }
  }
  return out;
}

RobustSolution solve_ruc(const SystemData& sys, const ForecastSeries& forecast,
                         const UncertaintyBox& box, const RobustOptions& opts) {
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  ScenarioPool pool;
  RobustSolution best;
  best.objective = kInf;
  best.lower_bound = -kInf;

  for (int iter = 1; iter <= opts.ccg_max_iter; ++iter) {
    best.iterations = iter;

    // Master: commitment + ranges + theta with one recourse copy per
    // pooled scenario (theta rows only for optimality scenarios).
    Model master;
    const CommitmentVars commitment = build_commitment_constraints(master, sys);
    const RangeVars ranges = build_dispatch_range_stage(master, sys, commitment);
    const int theta = master.add_variable(0.0, kInf, false, 1.0, "theta");
    std::vector<double> w_t(sys.num_reg_units());
    for (const auto& entry : pool.entries) {
      std::vector<std::pair<int, double>> theta_terms{{theta, 1.0}};
      for (int t = 0; t < sys.horizon; ++t) {
        for (int r = 0; r < sys.num_reg_units(); ++r) w_t[r] = entry.w[r][t];
        const DispatchBlock blk = add_dispatch_block(
            master, sys, ptdf, forecast, w_t, t, &ranges, nullptr, 0.0);
        if (!entry.feasibility_cut)
          for (const auto& [var, coeff] : blk.cost_terms)
            theta_terms.emplace_back(var, -coeff);
      }
      if (!entry.feasibility_cut)
        master.add_constraint(theta_terms, Relation::greater_equal, 0.0);
    }

    const Solution msol = solve(master, opts.solve);
    best.master_rows = master.num_constraints();
    best.master_cols = master.num_variables();
    if (msol.status == SolveStatus::infeasible) {
      best.status = SolveStatus::infeasible;
      return best;
    }
    if (msol.status != SolveStatus::optimal) {
      best.status = msol.status;
      return best;
    }
    best.lower_bound = std::max(best.lower_bound, msol.objective);
    best.lower_history.push_back(best.lower_bound);

    const CommitmentSchedule schedule = extract_schedule(msol, commitment);
    const DispatchRange range = extract_range(msol, ranges);

    const FeasibilityResult feas =
        feasibility_subproblem(sys, range, forecast, box, opts);
    if (feas.violation > opts.feas_tol) {
      best.upper_history.push_back(best.objective);
      if (!pool.add(feas.witness, true)) {
        best.status = SolveStatus::limit;  // stalled on a repeated witness
        return best;
      }
      best.pool_size = static_cast<int>(pool.entries.size());
      continue;
    }

    const WorstCaseResult wc = worst_case_cost(sys, range, forecast, box, opts);
    if (!wc.recourse_feasible) {
      best.upper_history.push_back(best.objective);
      if (!pool.add(wc.witness, true)) {
        best.status = SolveStatus::limit;
        return best;
      }
      best.pool_size = static_cast<int>(pool.entries.size());
      continue;
    }

    const double upper = fixed_cost(sys, schedule) + wc.cost;
    if (upper < best.objective) {
      best.objective = upper;
      best.schedule = schedule;
      best.range = range;
    }
    best.upper_history.push_back(best.objective);

    const double gap = (best.objective - best.lower_bound) /
                       std::max(1.0, std::abs(best.objective));
    if (gap <= opts.ccg_gap) {
      best.status = SolveStatus::optimal;
      best.certified = true;
      best.pool_size = static_cast<int>(pool.entries.size());
      return best;
    }
    if (!pool.add(wc.witness, false)) {
      best.status = SolveStatus::limit;  // no new scenario but gap remains
      return best;
    }
    best.pool_size = static_cast<int>(pool.entries.size());
  }
  best.status = SolveStatus::limit;
  return best;
}

}  // namespace wdruc
