#include "wdruc/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace wdruc {

namespace {

void check_config(const WassersteinConfig& cfg) {
  if (cfg.epsilon < 0) throw DataError("wasserstein radius must be >= 0");
  // beta = 1 is the degenerate all-mass-moves case; useful settings are > 1.
  if (!(cfg.beta >= 1)) throw DataError("beta must be >= 1");
}

double one_norm(const std::vector<std::vector<double>>& a,
                const std::vector<std::vector<double>>& b) {
  double d = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t t = 0; t < a[r].size(); ++t)
      d += std::abs(a[r][t] - b[r][t]);
  return d;
}

}  // namespace

UncertaintyBox OmegaBox::as_box() const {
  UncertaintyBox b;
  b.lower = lower;
  b.upper = upper;
  return b;
}

void validate_samples(const SampleSet& samples, const UncertaintyBox& box) {
  if (samples.count < 1 ||
      static_cast<int>(samples.error.size()) != samples.count)
    throw DataError("sample set must contain at least one sample");
  for (int s = 0; s < samples.count; ++s) {
    const auto& w = samples.error[s];
    if (static_cast<int>(w.size()) != box.units())
      throw DataError("sample " + std::to_string(s + 1) + " unit count mismatch");
    for (int r = 0; r < box.units(); ++r) {
      if (static_cast<int>(w[r].size()) != box.periods())
        throw DataError("sample " + std::to_string(s + 1) +
                        " period count mismatch");
      for (int t = 0; t < box.periods(); ++t) {
        if (w[r][t] < box.lower[r][t] - 1e-9 || w[r][t] > box.upper[r][t] + 1e-9)
          throw DataError("sample " + std::to_string(s + 1) + " unit " +
                          std::to_string(r + 1) + " period " +
                          std::to_string(t + 1) +
                          " lies outside the physical error box");
      }
    }
  }
}

SampleSet load_samples(const std::string& path, const SystemData& sys,
                       const UncertaintyBox& box) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open samples file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty samples file");
  // Header: scenario_id,reg_unit_id,period,error_mw
  std::map<std::string, int> unit_index;
  for (int r = 0; r < sys.num_reg_units(); ++r)
    unit_index[sys.reg_units[r].id] = r;

  std::map<int, std::vector<std::vector<double>>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string sid, uid, period, value;
    if (!std::getline(ss, sid, ',') || !std::getline(ss, uid, ',') ||
        !std::getline(ss, period, ',') || !std::getline(ss, value, ','))
      throw DataError("samples file line " + std::to_string(lineno) +
                      ": expected scenario_id,reg_unit_id,period,error_mw");
    uid.erase(0, uid.find_first_not_of(" \t"));
    uid.erase(uid.find_last_not_of(" \t\r") + 1);
    const auto it = unit_index.find(uid);
    if (it == unit_index.end())
      throw DataError("samples file line " + std::to_string(lineno) +
                      ": unknown reg unit '" + uid + "'");
    const int s = std::stoi(sid);
    const int t = std::stoi(period);
    if (t < 1 || t > sys.horizon)
      throw DataError("samples file line " + std::to_string(lineno) +
                      ": period out of range");
    auto& w = rows[s];
    if (w.empty())
      w.assign(sys.num_reg_units(), std::vector<double>(sys.horizon, 0.0));
    w[it->second][t - 1] = std::stod(value);
  }
  SampleSet set;
  for (auto& [sid, w] : rows) {
    (void)sid;
    set.error.push_back(std::move(w));
  }
  set.count = static_cast<int>(set.error.size());
  validate_samples(set, box);
  return set;
}

void save_samples(const std::string& path, const SystemData& sys,
                  const SampleSet& samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write samples file '" + path + "'");
  out << "scenario_id,reg_unit_id,period,error_mw\n";
  char buf[64];
  for (int s = 0; s < samples.count; ++s) {
    for (int r = 0; r < sys.num_reg_units(); ++r) {
      for (int t = 0; t < sys.horizon; ++t) {
        const double v = samples.error[s][r][t];
        std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);
        out << (s + 1) << ',' << sys.reg_units[r].id << ',' << (t + 1) << ','
            << buf << '\n';
      }
    }
  }
}

OmegaBox omega(const SampleSet& samples, const WassersteinConfig& cfg,
               const UncertaintyBox& box) {
  check_config(cfg);
  validate_samples(samples, box);
  const double widen =
      cfg.epsilon * std::max(static_cast<double>(samples.count), cfg.beta);
  OmegaBox om;
  const int R = box.units(), T = box.periods();
  om.lower.assign(R, std::vector<double>(T));
  om.upper.assign(R, std::vector<double>(T));
  om.analytic_lower.assign(R, std::vector<double>(T));
  om.analytic_upper.assign(R, std::vector<double>(T));
  for (int r = 0; r < R; ++r) {
    for (int t = 0; t < T; ++t) {
      double lo = samples.error[0][r][t], hi = samples.error[0][r][t];
      for (int s = 1; s < samples.count; ++s) {
        lo = std::min(lo, samples.error[s][r][t]);
        hi = std::max(hi, samples.error[s][r][t]);
      }
      om.analytic_lower[r][t] = lo - widen;
      om.analytic_upper[r][t] = hi + widen;
      om.lower[r][t] = std::max(box.lower[r][t], om.analytic_lower[r][t]);
      om.upper[r][t] = std::min(box.upper[r][t], om.analytic_upper[r][t]);
    }
  }
  return om;
}

Theorem1Witness theorem1_witness(const SampleSet& samples,
                                 const WassersteinConfig& cfg,
                                 const UncertaintyBox& box) {
  check_config(cfg);
  validate_samples(samples, box);
  const int S = samples.count;
  const int R = box.units(), T = box.periods();
  const double widen = cfg.epsilon * std::max(static_cast<double>(S), cfg.beta);

  Theorem1Witness wit;
  // Every coordinate's extreme sample sits exactly `widen` from the
  // analytic boundary, so any reachable coordinate serves as the mover.
  int mr = -1, mt = -1, ms = -1;
  double target = 0.0;
  for (int r = 0; r < R && mr < 0; ++r) {
    for (int t = 0; t < T && mr < 0; ++t) {
      double hi = samples.error[0][r][t];
      int hi_s = 0;
      double lo = samples.error[0][r][t];
      int lo_s = 0;
      for (int s = 1; s < S; ++s) {
        if (samples.error[s][r][t] > hi) {
          hi = samples.error[s][r][t];
          hi_s = s;
        }
        if (samples.error[s][r][t] < lo) {
          lo = samples.error[s][r][t];
          lo_s = s;
        }
      }
      if (hi + widen <= box.upper[r][t] + 1e-12) {
        mr = r;
        mt = t;
        ms = hi_s;
        target = hi + widen;
      } else if (lo - widen >= box.lower[r][t] - 1e-12) {
        mr = r;
        mt = t;
        ms = lo_s;
        target = lo - widen;
      }
    }
  }
  if (mr < 0) {
    wit.skip_reason =
        "analytic boundary unreachable: the physical box clips the shortest "
        "move in every coordinate";
    return wit;
  }

  const double moved_mass = 1.0 / std::max(static_cast<double>(S), cfg.beta);
  for (int s = 0; s < S; ++s) {
    const double mass = 1.0 / S - (s == ms ? moved_mass : 0.0);
    if (mass > 0) {
      wit.distribution.atom.push_back(samples.error[s]);
      wit.distribution.probability.push_back(mass);
    }
  }
  auto moved = samples.error[ms];
  moved[mr][mt] = target;
  wit.distribution.atom.push_back(moved);
  wit.distribution.probability.push_back(moved_mass);

  wit.transport_cost = moved_mass * std::abs(target - samples.error[ms][mr][mt]);
  // Mass outside the open analytic box, summed over atoms.
  double outside = 0.0;
  for (std::size_t k = 0; k < wit.distribution.atom.size(); ++k) {
    bool out = false;
    for (int r = 0; r < R && !out; ++r)
      for (int t = 0; t < T && !out; ++t) {
        const double lo_a = [&] {
          double lo = samples.error[0][r][t];
          for (int s = 1; s < S; ++s)
            lo = std::min(lo, samples.error[s][r][t]);
          return lo - widen;
        }();
        const double hi_a = [&] {
          double hi = samples.error[0][r][t];
          for (int s = 1; s < S; ++s)
            hi = std::max(hi, samples.error[s][r][t]);
          return hi + widen;
        }();
        const double v = wit.distribution.atom[k][r][t];
        if (v >= hi_a || v <= lo_a) out = true;
      }
    if (out) outside += wit.distribution.probability[k];
  }
  wit.mass_outside = outside;
  wit.constructed = true;
  return wit;
}

double wasserstein_distance_discrete(const DiscreteDistribution& p,
                                     const DiscreteDistribution& q) {
  const int np = static_cast<int>(p.atom.size());
  const int nq = static_cast<int>(q.atom.size());
  if (np == 0 || nq == 0)
    throw DataError("transport distance of an empty distribution");
  Model m;
  std::vector<int> plan(static_cast<std::size_t>(np) * nq);
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < nq; ++b)
      plan[a * nq + b] =
          m.add_variable(0.0, kInf, false, one_norm(p.atom[a], q.atom[b]));
  for (int a = 0; a < np; ++a) {
    std::vector<std::pair<int, double>> terms;
    for (int b = 0; b < nq; ++b) terms.emplace_back(plan[a * nq + b], 1.0);
    m.add_constraint(terms, Relation::equal, p.probability[a]);
  }
  for (int b = 0; b < nq; ++b) {
    std::vector<std::pair<int, double>> terms;
    for (int a = 0; a < np; ++a) terms.emplace_back(plan[a * nq + b], 1.0);
    m.add_constraint(terms, Relation::equal, q.probability[b]);
  }
  SolveParams params;
  params.backend = Backend::builtin;
  const Solution sol = solve(m, params);
  if (sol.status != SolveStatus::optimal)
    throw SolverError("transport LP did not solve (unbalanced masses?)");
  return sol.objective;
}

GvBounds gv_bounds(const SampleSet& samples, const OmegaBox& om) {
  const int R = om.units(), T = om.periods();
  GvBounds b;
  b.plus.assign(T, 0.0);
  b.minus.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < R; ++r) {
      for (int s = 0; s < samples.count; ++s) {
        b.plus[t] += om.upper[r][t] - samples.error[s][r][t];
        b.minus[t] -= om.lower[r][t] - samples.error[s][r][t];
      }
    }
  }
  for (int t = 0; t < T; ++t) {
    if (b.plus[t] < -1e-9 || b.minus[t] < -1e-9)
      throw DataError("sample outside omega support in gv_bounds");
    b.plus[t] = std::max(0.0, b.plus[t]);
    b.minus[t] = std::max(0.0, b.minus[t]);
  }
  return b;
}

double gv_primal(const std::vector<double>& c1, const GvBounds& bounds,
                 double epsilon, int S) {
  const int T = static_cast<int>(c1.size());
  Model m(Sense::maximize);
  std::vector<int> zp(T), zm(T);
  const double inv_s = 1.0 / S;
  for (int t = 0; t < T; ++t) {
    zp[t] = m.add_variable(0.0, bounds.plus[t], false, inv_s * c1[t]);
    zm[t] = m.add_variable(0.0, bounds.minus[t], false, -inv_s * c1[t]);
  }
  std::vector<std::pair<int, double>> budget;
  for (int t = 0; t < T; ++t) {
    budget.emplace_back(zp[t], inv_s);
    budget.emplace_back(zm[t], inv_s);
  }
  m.add_constraint(budget, Relation::less_equal, epsilon);
  SolveParams params;
  params.backend = Backend::builtin;
  const Solution sol = solve(m, params);
  if (sol.status != SolveStatus::optimal)
    throw SolverError("gv primal LP did not solve");
  return sol.objective;
}

double gv_disaggregated(const std::vector<double>& c1, const SampleSet& samples,
                        const OmegaBox& om, double epsilon) {
  const int R = om.units(), T = om.periods(), S = samples.count;
  Model m(Sense::maximize);
  const double inv_s = 1.0 / S;
  std::vector<std::pair<int, double>> budget;
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < R; ++r) {
      for (int s = 0; s < S; ++s) {
        const double vbar = om.upper[r][t] - samples.error[s][r][t];
        const double vlow = om.lower[r][t] - samples.error[s][r][t];
        const int vp = m.add_variable(0.0, std::max(0.0, vbar), false,
                                      inv_s * c1[t]);
        const int vm = m.add_variable(0.0, std::max(0.0, -vlow), false,
                                      -inv_s * c1[t]);
        budget.emplace_back(vp, inv_s);
        budget.emplace_back(vm, inv_s);
      }
    }
  }
  m.add_constraint(budget, Relation::less_equal, epsilon);
  SolveParams params;
  params.backend = Backend::builtin;
  const Solution sol = solve(m, params);
  if (sol.status != SolveStatus::optimal)
    throw SolverError("gv disaggregated LP did not solve");
  return sol.objective;
}

GvDual gv_dual(const std::vector<double>& c1, const GvBounds& bounds,
               double epsilon, int S) {
  const int T = static_cast<int>(c1.size());
  Model m;
  const int xi = m.add_variable(0.0, kInf, false, epsilon, "xi");
  std::vector<int> xp(T), xm(T);
  for (int t = 0; t < T; ++t) {
    xp[t] = m.add_variable(0.0, kInf, false, bounds.plus[t]);
    xm[t] = m.add_variable(0.0, kInf, false, bounds.minus[t]);
    m.add_constraint({{xi, 1.0}, {xp[t], static_cast<double>(S)}},
                     Relation::greater_equal, c1[t]);
    m.add_constraint({{xi, 1.0}, {xm[t], static_cast<double>(S)}},
                     Relation::greater_equal, -c1[t]);
  }
  SolveParams params;
  params.backend = Backend::builtin;
  const Solution sol = solve(m, params);
  if (sol.status != SolveStatus::optimal)
    throw SolverError("gv dual LP did not solve");
  GvDual out;
  out.value = sol.objective;
  out.xi = sol.value(xi);
  out.xi_plus.resize(T);
  out.xi_minus.resize(T);
  for (int t = 0; t < T; ++t) {
    out.xi_plus[t] = sol.value(xp[t]);
    out.xi_minus[t] = sol.value(xm[t]);
  }
  return out;
}

double gc(const AffinePolicy& policy, const SampleSet& samples,
          const CostFunctions& costs) {
  int T = 0;
  if (!policy.gen_slope.empty())
    T = static_cast<int>(policy.gen_slope[0].size());
  else if (!policy.load_slope.empty())
    T = static_cast<int>(policy.load_slope[0].size());
  else if (!policy.reg_slope.empty())
    T = static_cast<int>(policy.reg_slope[0].size());
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    double mean_total_error = 0.0;
    for (int s = 0; s < samples.count; ++s)
      for (const auto& unit : samples.error[s]) mean_total_error += unit[t];
    mean_total_error /= samples.count;
    total += costs.c1(policy, t) * mean_total_error + costs.c0(policy, t);
  }
  return total;
}

EwdrucSolution solve_ewdruc(const SystemData& sys,
                            const ForecastSeries& forecast,
                            const SampleSet& samples,
                            const WassersteinConfig& cfg,
                            const RobustOptions& opts) {
  check_config(cfg);
  const UncertaintyBox wbox = uncertainty_box(sys, forecast);
  validate_samples(samples, wbox);
  const OmegaBox om = omega(samples, cfg, wbox);
  const UncertaintyBox om_box = om.as_box();
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  const int S = samples.count;

  // Optimality scenarios (with per-sample epigraph rows) start at the
  // samples themselves so every eta is bounded from the first master.
  ScenarioPool pool;
  for (int s = 0; s < S; ++s) pool.add(samples.error[s], false);

  EwdrucSolution best;
  best.objective = kInf;
  best.lower_bound = -kInf;

  for (int iter = 1; iter <= opts.ccg_max_iter; ++iter) {
    best.iterations = iter;

    Model master;
    const CommitmentVars commitment = build_commitment_constraints(master, sys);
    const RangeVars ranges = build_dispatch_range_stage(master, sys, commitment);
    const int lambda = master.add_variable(0.0, kInf, false, cfg.epsilon, "lambda");
    std::vector<int> eta(S);
    for (int s = 0; s < S; ++s)
      eta[s] = master.add_variable(-kInf, kInf, false, 1.0 / S,
                                   "eta[" + std::to_string(s + 1) + "]");

    std::vector<double> w_t(sys.num_reg_units());
    for (const auto& entry : pool.entries) {
      std::vector<std::pair<int, double>> block_cost;
      for (int t = 0; t < sys.horizon; ++t) {
        for (int r = 0; r < sys.num_reg_units(); ++r) w_t[r] = entry.w[r][t];
        const DispatchBlock blk = add_dispatch_block(
            master, sys, ptdf, forecast, w_t, t, &ranges, nullptr, 0.0);
        for (const auto& term : blk.cost_terms) block_cost.push_back(term);
      }
      if (entry.feasibility_cut) continue;
      // One epigraph row per sample: eta_s >= cost(x_k) - lambda * dist.
      for (int s = 0; s < S; ++s) {
        const double dist = one_norm(entry.w, samples.error[s]);
        std::vector<std::pair<int, double>> row{{eta[s], 1.0}, {lambda, dist}};
        for (const auto& [var, coeff] : block_cost)
          row.emplace_back(var, -coeff);
        master.add_constraint(row, Relation::greater_equal, 0.0);
      }
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
    const double lambda_val = msol.value(lambda);

    // Feasibility over the full physical box (constraint on X nonempty
    // for every w in W).
    const FeasibilityResult feas =
        feasibility_subproblem(sys, range, forecast, wbox, opts);
    if (feas.violation > opts.feas_tol) {
      best.upper_history.push_back(best.objective);
      if (!pool.add(feas.witness, true)) {
        best.status = SolveStatus::limit;
        return best;
      }
      continue;
    }

    // Per-sample optimality subproblems: maximize f(range, w) - lambda *
    // ||w - sample||_1 over omega.  f is a max of affine functions of w and
    // the 1-norm separates by coordinate, so per period the maximum is
    // attained with every coordinate in {lower, sample, upper}.
    double upper_sum = 0.0;
    std::vector<std::vector<std::vector<double>>> violated;  // scenarios to add
    for (int s = 0; s < S; ++s) {
      double phi = 0.0;
      auto worst = samples.error[s];
      for (int t = 0; t < sys.horizon; ++t) {
        std::vector<std::vector<double>> cand(sys.num_reg_units());
        for (int r = 0; r < sys.num_reg_units(); ++r) {
          cand[r].push_back(om.lower[r][t]);
          const double mid = std::clamp(samples.error[s][r][t], om.lower[r][t],
                                        om.upper[r][t]);
          if (mid > cand[r].back() + 1e-12) cand[r].push_back(mid);
          if (om.upper[r][t] > cand[r].back() + 1e-12)
            cand[r].push_back(om.upper[r][t]);
        }
        std::vector<std::size_t> pick(sys.num_reg_units(), 0);
        double best_val = -kInf;
        std::vector<double> best_w;
        while (true) {
          std::vector<double> w(sys.num_reg_units());
          double dist = 0.0;
          for (int r = 0; r < sys.num_reg_units(); ++r) {
            w[r] = cand[r][pick[r]];
            dist += std::abs(w[r] - samples.error[s][r][t]);
          }
          const DispatchResult d = rt_dispatch(sys, range, forecast, w, t, &ptdf);
          if (d.feasible) {
            const double val = d.cost - lambda_val * dist;
            if (val > best_val) {
              best_val = val;
              best_w = w;
            }
          }
          int r = 0;
          for (; r < sys.num_reg_units(); ++r) {
            if (++pick[r] < cand[r].size()) break;
            pick[r] = 0;
          }
          if (r == sys.num_reg_units()) break;
        }
        phi += best_val;
        for (int r = 0; r < sys.num_reg_units(); ++r) worst[r][t] = best_w[r];
      }
      upper_sum += phi;
      if (phi > msol.value(eta[s]) + 1e-7 * (1.0 + std::abs(phi)))
        violated.push_back(worst);
    }

    const double upper = fixed_cost(sys, schedule) + lambda_val * cfg.epsilon +
                         upper_sum / S;
    if (upper < best.objective) {
      best.objective = upper;
      best.schedule = schedule;
      best.range = range;
      best.lambda = lambda_val;
    }
    best.upper_history.push_back(best.objective);

    const double gap = (best.objective - best.lower_bound) /
                       std::max(1.0, std::abs(best.objective));
    if (gap <= opts.ccg_gap || violated.empty()) {
      best.status = SolveStatus::optimal;
      best.certified = gap <= opts.ccg_gap;
      best.pool_size = static_cast<int>(pool.entries.size());
      return best;
    }
    bool added = false;
    for (auto& w : violated) added = pool.add(std::move(w), false) || added;
    if (!added) {
      best.status = SolveStatus::limit;
      return best;
    }
    best.pool_size = static_cast<int>(pool.entries.size());
  }
  best.status = SolveStatus::limit;
  return best;
}

}  // namespace wdruc
