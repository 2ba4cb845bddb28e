#include "wdruc/core_uc.hpp"

#include <algorithm>
#include <cmath>

namespace wdruc {

namespace {

std::string gt_name(const char* stem, const SystemData& sys, int g, int t) {
  return std::string(stem) + "[" + sys.generators[g].id + "," +
         std::to_string(t + 1) + "]";
}

}  // namespace

CommitmentVars build_commitment_constraints(Model& model,
                                            const SystemData& sys) {
  const int G = sys.num_generators();
  const int T = sys.horizon;
  CommitmentVars v;
  v.on.assign(G, std::vector<int>(T));
  v.up.assign(G, std::vector<int>(T));
  v.down.assign(G, std::vector<int>(T));

  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.generators[g];
    for (int t = 0; t < T; ++t) {
      v.on[g][t] =
          model.add_variable(0, 1, true, gen.no_load_cost, gt_name("on", sys, g, t));
      v.up[g][t] =
          model.add_variable(0, 1, true, gen.startup_cost, gt_name("up", sys, g, t));
      v.down[g][t] = model.add_variable(0, 1, true, gen.shutdown_cost,
                                        gt_name("down", sys, g, t));
    }
  }

  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.generators[g];
    const double on0 = gen.initial_on ? 1.0 : 0.0;
    for (int t = 0; t < T; ++t) {
      // Start-up / shut-down logic; period t-1 terms fold the initial state
      // into the rhs at t = 0.
      if (t == 0) {
        model.add_constraint({{v.up[g][t], 1.0}, {v.on[g][t], -1.0}},
                             Relation::greater_equal, -on0);
        model.add_constraint({{v.down[g][t], 1.0}, {v.on[g][t], 1.0}},
                             Relation::greater_equal, on0);
        model.add_constraint({{v.up[g][t], 1.0}}, Relation::less_equal,
                             1.0 - on0);
      } else {
        model.add_constraint(
            {{v.up[g][t], 1.0}, {v.on[g][t], -1.0}, {v.on[g][t - 1], 1.0}},
            Relation::greater_equal, 0.0);
        model.add_constraint(
            {{v.down[g][t], 1.0}, {v.on[g][t], 1.0}, {v.on[g][t - 1], -1.0}},
            Relation::greater_equal, 0.0);
        model.add_constraint({{v.on[g][t - 1], 1.0}, {v.up[g][t], 1.0}},
                             Relation::less_equal, 1.0);
      }
      model.add_constraint({{v.on[g][t], 1.0}, {v.down[g][t], 1.0}},
                           Relation::less_equal, 1.0);

      // Minimum up time: on[t] - on[t-1] <= on[tau].
      for (int tau = t; tau <= std::min(t - 1 + gen.min_up, T - 1); ++tau) {
        if (t == 0) {
          model.add_constraint({{v.on[g][t], 1.0}, {v.on[g][tau], -1.0}},
                               Relation::less_equal, on0);
        } else {
          model.add_constraint(
              {{v.on[g][t], 1.0}, {v.on[g][t - 1], -1.0}, {v.on[g][tau], -1.0}},
              Relation::less_equal, 0.0);
        }
      }
      // Minimum down time: on[t-1] - on[t] <= 1 - on[tau].
      for (int tau = t; tau <= std::min(t - 1 + gen.min_down, T - 1); ++tau) {
        if (t == 0) {
          model.add_constraint({{v.on[g][t], -1.0}, {v.on[g][tau], 1.0}},
                               Relation::less_equal, 1.0 - on0);
        } else {
          model.add_constraint(
              {{v.on[g][t - 1], 1.0}, {v.on[g][t], -1.0}, {v.on[g][tau], 1.0}},
              Relation::less_equal, 1.0);
        }
      }
    }
  }
  return v;
}

RangeVars build_dispatch_range_stage(Model& model, const SystemData& sys,
                                     const CommitmentVars& commitment) {
  const int G = sys.num_generators();
  const int T = sys.horizon;
  RangeVars r;
  r.upper.assign(G, std::vector<int>(T));
  r.lower.assign(G, std::vector<int>(T));
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.generators[g];
    for (int t = 0; t < T; ++t) {
      r.upper[g][t] = model.add_variable(0, gen.p_max, false, 0.0,
                                         gt_name("xmax", sys, g, t));
      r.lower[g][t] = model.add_variable(0, gen.p_max, false, 0.0,
                                         gt_name("xmin", sys, g, t));
    }
  }
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.generators[g];
    const double on0 = gen.initial_on ? 1.0 : 0.0;
    const double x0 = gen.initial_output;
    for (int t = 0; t < T; ++t) {
      // Capacity nesting: Xmin*on <= xmin <= xmax <= Xmax*on.
      model.add_constraint({{r.lower[g][t], 1.0}, {commitment.on[g][t], -gen.p_min}},
                           Relation::greater_equal, 0.0);
      model.add_constraint({{r.lower[g][t], 1.0}, {r.upper[g][t], -1.0}},
                           Relation::less_equal, 0.0);
      model.add_constraint({{r.upper[g][t], 1.0}, {commitment.on[g][t], -gen.p_max}},
                           Relation::less_equal, 0.0);
      // Up-ramp link: xmax[t] - xmin[t-1] <= RU*on[t-1] + SU*up[t].
      if (t == 0) {
        model.add_constraint(
            {{r.upper[g][t], 1.0}, {commitment.up[g][t], -gen.startup_ramp}},
            Relation::less_equal, x0 + gen.ramp_up * on0);
      } else {
        model.add_constraint({{r.upper[g][t], 1.0},
                              {r.lower[g][t - 1], -1.0},
                              {commitment.on[g][t - 1], -gen.ramp_up},
                              {commitment.up[g][t], -gen.startup_ramp}},
                             Relation::less_equal, 0.0);
      }
      // Down-ramp link: xmax[t-1] - xmin[t] <= RD*on[t] + SD*down[t].
      if (t == 0) {
        model.add_constraint({{r.lower[g][t], -1.0},
                              {commitment.on[g][t], -gen.ramp_down},
                              {commitment.down[g][t], -gen.shutdown_ramp}},
                             Relation::less_equal, -x0);
      } else {
        model.add_constraint({{r.upper[g][t - 1], 1.0},
                              {r.lower[g][t], -1.0},
                              {commitment.on[g][t], -gen.ramp_down},
                              {commitment.down[g][t], -gen.shutdown_ramp}},
                             Relation::less_equal, 0.0);
      }
    }
  }
  return r;
}

namespace {

DispatchBlock add_dispatch_block_impl(Model& model, const SystemData& sys,
                                      const ShiftFactorMatrix& ptdf,
                                      const ForecastSeries& forecast,
                                      const std::vector<double>& w_t, int t,
                                      const RangeVars* range_vars,
                                      const DispatchRange* range_vals,
                                      double cost_weight, bool elastic) {
  const int G = sys.num_generators();
  const int R = sys.num_reg_units();
  const int L = sys.num_loads();
  DispatchBlock blk;
  blk.gen.resize(G);
  blk.shed.resize(L);
  blk.curtail.resize(R);

  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.generators[g];
    double lo = 0.0, hi = gen.p_max;
    if (range_vals) {
      lo = range_vals->lower[g][t];
      hi = range_vals->upper[g][t];
      if (hi < lo) hi = lo;  // guard against solver roundoff in fixed ranges
    }
    blk.gen[g] = model.add_variable(lo, hi, false,
                                    cost_weight * gen.marginal_cost);
    blk.cost_terms.emplace_back(blk.gen[g], gen.marginal_cost);
    if (range_vars) {
      model.add_constraint({{blk.gen[g], 1.0}, {range_vars->upper[g][t], -1.0}},
                           Relation::less_equal, 0.0);
      model.add_constraint({{blk.gen[g], 1.0}, {range_vars->lower[g][t], -1.0}},
                           Relation::greater_equal, 0.0);
    }
  }
  for (int l = 0; l < L; ++l) {
    const auto& load = sys.loads[l];
    const double cap = load.sheddable ? load.demand[t] : 0.0;
    blk.shed[l] = model.add_variable(0.0, cap, false,
                                     cost_weight * load.shed_cost);
    if (load.sheddable)
      blk.cost_terms.emplace_back(blk.shed[l], load.shed_cost);
  }
  for (int r = 0; r < R; ++r) {
    const auto& reg = sys.reg_units[r];
    const double avail = forecast.value[r][t] + w_t[r];
    blk.curtail[r] = model.add_variable(0.0, std::max(0.0, avail), false,
                                        cost_weight * reg.curtail_cost);
    blk.cost_terms.emplace_back(blk.curtail[r], reg.curtail_cost);
  }

  // Net injection constants per bus: loads withdraw, REG injects.
  std::vector<double> bus_const(sys.num_buses(), 0.0);
  for (int l = 0; l < L; ++l) bus_const[sys.loads[l].bus] -= sys.loads[l].demand[t];
  for (int r = 0; r < R; ++r)
    bus_const[sys.reg_units[r].bus] += forecast.value[r][t] + w_t[r];

  // Line limits through shift factors.
  for (int ln = 0; ln < sys.num_lines(); ++ln) {
    std::vector<std::pair<int, double>> terms;
    double rhs_const = 0.0;
    for (int g = 0; g < G; ++g) {
      const double f = ptdf.at(sys.generators[g].bus, ln);
      if (f != 0.0) terms.emplace_back(blk.gen[g], f);
    }
    for (int l = 0; l < L; ++l) {
      const double f = ptdf.at(sys.loads[l].bus, ln);
      if (f != 0.0) terms.emplace_back(blk.shed[l], f);
    }
    for (int r = 0; r < R; ++r) {
      const double f = ptdf.at(sys.reg_units[r].bus, ln);
      if (f != 0.0) terms.emplace_back(blk.curtail[r], -f);
    }
    for (int b = 0; b < sys.num_buses(); ++b)
      rhs_const += ptdf.at(b, ln) * bus_const[b];
    const double cap = sys.lines[ln].capacity;
    auto up_terms = terms;
    auto dn_terms = terms;
    if (elastic) {
      up_terms.emplace_back(model.add_variable(0.0, kInf, false, 1.0), -1.0);
      dn_terms.emplace_back(model.add_variable(0.0, kInf, false, 1.0), 1.0);
    }
    model.add_constraint(up_terms, Relation::less_equal, cap - rhs_const);
    model.add_constraint(dn_terms, Relation::greater_equal, -cap - rhs_const);
  }

  // Supply-demand balance.
  {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
    for (int g = 0; g < G; ++g) terms.emplace_back(blk.gen[g], 1.0);
    for (int l = 0; l < L; ++l) terms.emplace_back(blk.shed[l], 1.0);
    for (int r = 0; r < R; ++r) terms.emplace_back(blk.curtail[r], -1.0);
    if (elastic) {
      terms.emplace_back(model.add_variable(0.0, kInf, false, 1.0), 1.0);
      terms.emplace_back(model.add_variable(0.0, kInf, false, 1.0), -1.0);
    }
    for (int b = 0; b < sys.num_buses(); ++b) rhs -= bus_const[b];
    model.add_constraint(terms, Relation::equal, rhs);
  }
  return blk;
}

}  // namespace

DispatchBlock add_dispatch_block(Model& model, const SystemData& sys,
                                 const ShiftFactorMatrix& ptdf,
                                 const ForecastSeries& forecast,
                                 const std::vector<double>& w_t, int t,
                                 const RangeVars* range_vars,
                                 const DispatchRange* range_vals,
                                 double cost_weight) {
  return add_dispatch_block_impl(model, sys, ptdf, forecast, w_t, t,
                                 range_vars, range_vals, cost_weight, false);
}

DispatchBlock add_elastic_dispatch_block(Model& model, const SystemData& sys,
                                         const ShiftFactorMatrix& ptdf,
                                         const ForecastSeries& forecast,
                                         const std::vector<double>& w_t, int t,
                                         const DispatchRange& range) {
  return add_dispatch_block_impl(model, sys, ptdf, forecast, w_t, t, nullptr,
                                 &range, 0.0, true);
}

DucModel build_duc(const SystemData& sys, const ForecastSeries& forecast,
                   const std::vector<std::vector<double>>& w) {
  DucModel duc;
  duc.commitment = build_commitment_constraints(duc.model, sys);
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  const int T = sys.horizon;

  std::vector<double> w_t(sys.num_reg_units());
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < sys.num_reg_units(); ++r) w_t[r] = w[r][t];
    duc.blocks.push_back(add_dispatch_block(duc.model, sys, ptdf, forecast,
                                            w_t, t, nullptr, nullptr, 1.0));
  }

  // Generation limits (1i) and ramping (1j) on the dispatch itself.
  for (int g = 0; g < sys.num_generators(); ++g) {
    const auto& gen = sys.generators[g];
    const double on0 = gen.initial_on ? 1.0 : 0.0;
    for (int t = 0; t < T; ++t) {
      const int xg = duc.blocks[t].gen[g];
      duc.model.add_constraint(
          {{xg, 1.0}, {duc.commitment.on[g][t], -gen.p_max}},
          Relation::less_equal, 0.0);
      duc.model.add_constraint(
          {{xg, 1.0}, {duc.commitment.on[g][t], -gen.p_min}},
          Relation::greater_equal, 0.0);
      if (t == 0) {
        duc.model.add_constraint(
            {{xg, 1.0}, {duc.commitment.up[g][t], -gen.startup_ramp}},
            Relation::less_equal,
            gen.initial_output + gen.ramp_up * on0);
        duc.model.add_constraint(
            {{xg, 1.0},
             {duc.commitment.on[g][t], gen.ramp_down},
             {duc.commitment.down[g][t], gen.shutdown_ramp}},
            Relation::greater_equal, gen.initial_output);
      } else {
        const int xprev = duc.blocks[t - 1].gen[g];
        duc.model.add_constraint(
            {{xg, 1.0},
             {xprev, -1.0},
             {duc.commitment.on[g][t - 1], -gen.ramp_up},
             {duc.commitment.up[g][t], -gen.startup_ramp}},
            Relation::less_equal, 0.0);
        duc.model.add_constraint(
            {{xg, 1.0},
             {xprev, -1.0},
             {duc.commitment.on[g][t], gen.ramp_down},
             {duc.commitment.down[g][t], gen.shutdown_ramp}},
            Relation::greater_equal, 0.0);
      }
    }
  }
  return duc;
}

SucModel build_suc(const SystemData& sys, const ForecastSeries& forecast,
                   const SampleSet& samples) {
  if (samples.count < 1) throw DataError("SUC requires at least one sample");
  SucModel suc;
  suc.commitment = build_commitment_constraints(suc.model, sys);
  suc.ranges = build_dispatch_range_stage(suc.model, sys, suc.commitment);
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  const double weight = 1.0 / samples.count;

  std::vector<double> w_t(sys.num_reg_units());
  suc.blocks.resize(samples.count);
  for (int s = 0; s < samples.count; ++s) {
    for (int t = 0; t < sys.horizon; ++t) {
      for (int r = 0; r < sys.num_reg_units(); ++r)
        w_t[r] = samples.error[s][r][t];
      suc.blocks[s].push_back(add_dispatch_block(suc.model, sys, ptdf,
                                                 forecast, w_t, t,
                                                 &suc.ranges, nullptr, weight));
    }
  }
  return suc;
}

DispatchResult rt_dispatch(const SystemData& sys, const DispatchRange& range,
                           const ForecastSeries& forecast,
                           const std::vector<double>& w_t, int t,
                           const ShiftFactorMatrix* ptdf) {
  ShiftFactorMatrix local;
  if (!ptdf) {
    local = compute_ptdf(sys);
    ptdf = &local;
  }
  Model model;
  const DispatchBlock blk = add_dispatch_block(model, sys, *ptdf, forecast,
                                               w_t, t, nullptr, &range, 1.0);
  SolveParams params;
  params.backend = Backend::builtin;
  const Solution sol = solve(model, params);

  DispatchResult res;
  if (sol.status != SolveStatus::optimal) return res;
  res.feasible = true;
  res.cost = sol.objective;
  res.gen.resize(sys.num_generators());
  res.shed.resize(sys.num_loads());
  res.curtail.resize(sys.num_reg_units());
  for (int g = 0; g < sys.num_generators(); ++g) res.gen[g] = sol.value(blk.gen[g]);
  for (int l = 0; l < sys.num_loads(); ++l) res.shed[l] = sol.value(blk.shed[l]);
  for (int r = 0; r < sys.num_reg_units(); ++r)
    res.curtail[r] = sol.value(blk.curtail[r]);
  return res;
}

SecondStageResult evaluate_second_stage(
    const SystemData& sys, const DispatchRange& range,
    const ForecastSeries& forecast,
    const std::vector<std::vector<double>>& w, const ShiftFactorMatrix* ptdf) {
  ShiftFactorMatrix local;
  if (!ptdf) {
    local = compute_ptdf(sys);
    ptdf = &local;
  }
  SecondStageResult out;
  std::vector<double> w_t(sys.num_reg_units());
  double total = 0.0;
  for (int t = 0; t < sys.horizon; ++t) {
    for (int r = 0; r < sys.num_reg_units(); ++r) w_t[r] = w[r][t];
    const DispatchResult d = rt_dispatch(sys, range, forecast, w_t, t, ptdf);
    if (!d.feasible) {
      out.failed_period = t;
      return out;
    }
    total += d.cost;
  }
  out.feasible = true;
  out.cost = total;
  return out;
}

CommitmentSchedule extract_schedule(const Solution& sol,
                                    const CommitmentVars& vars) {
  CommitmentSchedule s;
  const int G = static_cast<int>(vars.on.size());
  const int T = G > 0 ? static_cast<int>(vars.on[0].size()) : 0;
  s.on.assign(G, std::vector<int>(T));
  s.up.assign(G, std::vector<int>(T));
  s.down.assign(G, std::vector<int>(T));
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      s.on[g][t] = static_cast<int>(std::lround(sol.value(vars.on[g][t])));
      s.up[g][t] = static_cast<int>(std::lround(sol.value(vars.up[g][t])));
      s.down[g][t] = static_cast<int>(std::lround(sol.value(vars.down[g][t])));
    }
  }
  return s;
}

DispatchRange extract_range(const Solution& sol, const RangeVars& vars) {
  DispatchRange r;
  const int G = static_cast<int>(vars.upper.size());
  const int T = G > 0 ? static_cast<int>(vars.upper[0].size()) : 0;
  r.upper.assign(G, std::vector<double>(T));
  r.lower.assign(G, std::vector<double>(T));
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      r.upper[g][t] = sol.value(vars.upper[g][t]);
      r.lower[g][t] = sol.value(vars.lower[g][t]);
      if (r.upper[g][t] < r.lower[g][t]) r.upper[g][t] = r.lower[g][t];
    }
  }
  return r;
}

double fixed_cost(const SystemData& sys, const CommitmentSchedule& schedule) {
  double c = 0.0;
  for (int g = 0; g < sys.num_generators(); ++g) {
    const auto& gen = sys.generators[g];
    for (std::size_t t = 0; t < schedule.on[g].size(); ++t) {
      c += gen.no_load_cost * schedule.on[g][t] +
           gen.startup_cost * schedule.up[g][t] +
           gen.shutdown_cost * schedule.down[g][t];
    }
  }
  return c;
}

}  // namespace wdruc
