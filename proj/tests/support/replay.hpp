// Constraint-replay verifier: re-checks every operational constraint of the
// deterministic UC directly from solution numbers, without touching the
// model-building code paths under test.
#ifndef WDRUC_TESTS_REPLAY_HPP
#define WDRUC_TESTS_REPLAY_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "wdruc/core_uc.hpp"
#include "wdruc/system.hpp"

namespace replay {

struct ScenarioDispatch {
  // [t] -> per-entity values for that period
  std::vector<std::vector<double>> gen;      // [T][G]
  std::vector<std::vector<double>> shed;     // [T][loads]
  std::vector<std::vector<double>> curtail;  // [T][R]
};

/// Maximum violation across commitment logic, min up/down, generation
/// limits, ramps, shed/curtail limits, line limits, and balance for one
/// scenario's dispatch path.
inline double max_violation(const wdruc::SystemData& sys,
                            const wdruc::ForecastSeries& fc,
                            const std::vector<std::vector<double>>& w,
                            const wdruc::CommitmentSchedule& u,
                            const ScenarioDispatch& d) {
  const int T = sys.horizon;
  double worst = 0.0;
  auto bump = [&](double violation) { worst = std::max(worst, violation); };

  for (int g = 0; g < sys.num_generators(); ++g) {
    const auto& gen = sys.generators[g];
    const int on0 = gen.initial_on ? 1 : 0;
    for (int t = 0; t < T; ++t) {
      const int on = u.on[g][t];
      const int up = u.up[g][t];
      const int dn = u.down[g][t];
      const int prev_on = t == 0 ? on0 : u.on[g][t - 1];
      bump(std::abs(on * (1 - on)));  // binaries
      bump(on - prev_on - up);        // (start-up logic)
      bump(prev_on - on - dn);        // (shut-down logic)
      bump(on + dn - 1);
      bump(prev_on + up - 1);
      for (int tau = t; tau <= std::min(t - 1 + gen.min_up, T - 1); ++tau)
        bump(on - prev_on - u.on[g][tau]);
      for (int tau = t; tau <= std::min(t - 1 + gen.min_down, T - 1); ++tau)
        bump(prev_on - on - (1 - u.on[g][tau]));

      const double x = d.gen[t][g];
      const double xprev = t == 0 ? gen.initial_output : d.gen[t - 1][g];
      bump(gen.p_min * on - x);
      bump(x - gen.p_max * on);
      bump(x - xprev - gen.ramp_up * prev_on - gen.startup_ramp * up);
      bump(xprev - x - gen.ramp_down * on - gen.shutdown_ramp * dn);
    }
  }

  const wdruc::ShiftFactorMatrix ptdf = wdruc::compute_ptdf(sys);
  for (int t = 0; t < T; ++t) {
    double balance = 0.0;
    std::vector<double> inj(sys.num_buses(), 0.0);
    for (int g = 0; g < sys.num_generators(); ++g) {
      inj[sys.generators[g].bus] += d.gen[t][g];
      balance += d.gen[t][g];
    }
    for (int l = 0; l < sys.num_loads(); ++l) {
      const auto& load = sys.loads[l];
      const double shed = d.shed[t][l];
      bump(-shed);
      bump(shed - (load.sheddable ? load.demand[t] : 0.0));
      inj[load.bus] += shed - load.demand[t];
      balance += shed - load.demand[t];
    }
    for (int r = 0; r < sys.num_reg_units(); ++r) {
      const double avail = fc.value[r][t] + w[r][t];
      const double cur = d.curtail[t][r];
      bump(-cur);
      bump(cur - std::max(0.0, avail));
      inj[sys.reg_units[r].bus] += avail - cur;
      balance += avail - cur;
    }
    bump(std::abs(balance));
    for (int ln = 0; ln < sys.num_lines(); ++ln) {
      double flow = 0.0;
      for (int b = 0; b < sys.num_buses(); ++b) flow += ptdf.at(b, ln) * inj[b];
      bump(std::abs(flow) - sys.lines[ln].capacity);
    }
  }
  return worst;
}

inline ScenarioDispatch dispatch_from_blocks(
    const wdruc::Solution& sol, const std::vector<wdruc::DispatchBlock>& blocks) {
  ScenarioDispatch d;
  for (const auto& blk : blocks) {
    std::vector<double> g, s, c;
    for (int id : blk.gen) g.push_back(sol.value(id));
    for (int id : blk.shed) s.push_back(sol.value(id));
    for (int id : blk.curtail) c.push_back(sol.value(id));
    d.gen.push_back(std::move(g));
    d.shed.push_back(std::move(s));
    d.curtail.push_back(std::move(c));
  }
  return d;
}

}  // namespace replay

#endif  // WDRUC_TESTS_REPLAY_HPP
