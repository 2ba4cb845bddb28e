#include "doctest.h"

#include <cmath>
#include <random>

#include "support/toys.hpp"
#include "wdruc/robust.hpp"

using namespace wdruc;

namespace {

UncertaintyBox flat_box(int R, int T, double lo, double hi) {
  UncertaintyBox b;
  b.lower.assign(R, std::vector<double>(T, lo));
  b.upper.assign(R, std::vector<double>(T, hi));
  return b;
}

DispatchRange flat_range(int G, int T, double lo, double hi) {
  DispatchRange r;
  r.lower.assign(G, std::vector<double>(T, lo));
  r.upper.assign(G, std::vector<double>(T, hi));
  return r;
}

}  // namespace

TEST_CASE("worst case cost is the costlier box vertex") {
  toys::GenSpec spec;
  spec.p_max = 10.0;
  spec.marginal = 10.0;
  auto sys = toys::Builder(1, 1)
                 .gen(1, spec)
                 .load(1, {5.0}, true, 500.0)
                 .pv(1, 9.0)
                 .done();
  auto fc = toys::flat_forecast(sys, 2.0);
  const auto range = flat_range(1, 1, 0.0, 10.0);
  const auto box = flat_box(1, 1, -2.0, 2.0);

  // Oracle: evaluate both vertices through rt_dispatch directly.
  const double at_lo = rt_dispatch(sys, range, fc, {-2.0}, 0).cost;
  const double at_hi = rt_dispatch(sys, range, fc, {2.0}, 0).cost;
  const WorstCaseResult wc = worst_case_cost(sys, range, fc, box);
  REQUIRE(wc.recourse_feasible);
  CHECK(wc.cost == doctest::Approx(std::max(at_lo, at_hi)));
  // Shedding is expensive, so the deficit vertex w = -2 dominates.
  CHECK(wc.witness[0][0] == doctest::Approx(-2.0));
}

TEST_CASE("degenerate box reduces the worst case to f at its point") {
  toys::GenSpec spec;
  spec.p_max = 10.0;
  spec.marginal = 7.0;
  auto sys = toys::Builder(1, 2).gen(1, spec).load(1, {5.0, 6.0}).pv(1, 4.0).done();
  auto fc = toys::flat_forecast(sys, 1.0);
  const auto range = flat_range(1, 2, 0.0, 10.0);
  const WorstCaseResult wc =
      worst_case_cost(sys, range, fc, flat_box(1, 2, 0.0, 0.0));
  const SecondStageResult f =
      evaluate_second_stage(sys, range, fc, toys::zero_error(sys));
  REQUIRE(wc.recourse_feasible);
  REQUIRE(f.feasible);
  CHECK(wc.cost == doctest::Approx(f.cost));
}

TEST_CASE("box vertices dominate a dense interior grid") {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    auto inst = toys::random_instance(rng, 2, 2);
    const auto& sys = inst.sys;
    const int G = sys.num_generators(), T = sys.horizon;
    DispatchRange range = flat_range(G, T, 0.0, 0.0);
    for (int g = 0; g < G; ++g)
      for (int t = 0; t < T; ++t) {
        range.lower[g][t] = sys.generators[g].p_min;
        range.upper[g][t] = sys.generators[g].p_min +
                            (sys.generators[g].p_max - sys.generators[g].p_min) *
                                u01(rng);
      }
    const UncertaintyBox box = uncertainty_box(sys, inst.forecast);
    const WorstCaseResult wc = worst_case_cost(sys, range, inst.forecast, box);
    if (!wc.recourse_feasible) continue;

    const ShiftFactorMatrix ptdf = compute_ptdf(sys);
    double grid_total = 0.0;
    bool grid_ok = true;
    for (int t = 0; t < T && grid_ok; ++t) {
      double period_best = -1e300;
      const int steps = 7;
      for (int k = 0; k <= steps; ++k) {
        const double frac = static_cast<double>(k) / steps;
        std::vector<double> w(sys.num_reg_units());
        for (int r = 0; r < sys.num_reg_units(); ++r)
          w[r] = box.lower[r][t] + frac * (box.upper[r][t] - box.lower[r][t]);
        const DispatchResult d =
            rt_dispatch(sys, range, inst.forecast, w, t, &ptdf);
        if (d.feasible) period_best = std::max(period_best, d.cost);
      }
      if (period_best < -1e299)
        grid_ok = false;
      else
        grid_total += period_best;
    }
    if (grid_ok) CHECK(wc.cost >= grid_total - 1e-6);
  }
}

TEST_CASE("elastic violation of an inadequate range is the supply gap") {
  toys::GenSpec spec;
  spec.p_max = 10.0;
  auto sys = toys::Builder(1, 1).gen(1, spec).load(1, {5.0}).pv(1, 4.0).done();
  auto fc = toys::flat_forecast(sys, 2.0);
  const auto range = flat_range(1, 1, 0.0, 0.0);  // unit locked at zero
  const auto box = flat_box(1, 1, -1.0, 1.0);
  // Hand elastic oracle: no shedding allowed, curtailment never helps, so
  // the balance slack equals d - (wf + w); the worst vertex minimizes
  // supply, i.e. w = -1, giving 5 - (2 - 1) = 4.
  const FeasibilityResult feas = feasibility_subproblem(sys, range, fc, box);
  CHECK(feas.violation == doctest::Approx(4.0));
  CHECK(feas.witness[0][0] == doctest::Approx(-1.0));

  SUBCASE("dualized fallback matches enumeration") {
    RobustOptions opts;
    const auto pw =
        internal::period_worst_dual_milp(sys, range, fc, box, 0, true, opts);
    CHECK(pw.value == doctest::Approx(4.0));
    CHECK(pw.w_t[0] == doctest::Approx(-1.0));
  }
}

TEST_CASE("zero-uncertainty feasible dispatch has zero violation") {
  toys::GenSpec spec;
  spec.p_max = 10.0;
  auto sys = toys::Builder(1, 1).gen(1, spec).load(1, {5.0}).done();
  ForecastSeries fc;
  const FeasibilityResult feas = feasibility_subproblem(
      sys, flat_range(1, 1, 0.0, 10.0), fc, flat_box(0, 1, 0.0, 0.0));
  CHECK(feas.violation <= 1e-9);
}

TEST_CASE("dualized worst-case MILP matches vertex enumeration") {
  std::mt19937_64 rng(4711);
  RobustOptions opts;
  int checked = 0;
  for (int trial = 0; trial < 8; ++trial) {
    auto inst = toys::random_instance(rng, 2, 2);
    const auto& sys = inst.sys;
    const int G = sys.num_generators();
    DispatchRange range = flat_range(G, sys.horizon, 0.0, 0.0);
    for (int g = 0; g < G; ++g)
      for (int t = 0; t < sys.horizon; ++t) {
        range.lower[g][t] = sys.generators[g].p_min;
        range.upper[g][t] = sys.generators[g].p_max;
      }
    const UncertaintyBox box = uncertainty_box(sys, inst.forecast);
    const ShiftFactorMatrix ptdf = compute_ptdf(sys);
    for (int t = 0; t < sys.horizon; ++t) {
      double enum_cost = -1e300, enum_elastic = -1e300;
      bool infeasible_vertex = false;
      internal::for_each_period_vertex(box, t, [&](const std::vector<double>& w) {
        const DispatchResult d =
            rt_dispatch(sys, range, inst.forecast, w, t, &ptdf);
        if (!d.feasible)
          infeasible_vertex = true;
        else
          enum_cost = std::max(enum_cost, d.cost);
        enum_elastic = std::max(
            enum_elastic,
            elastic_dispatch_violation(sys, range, inst.forecast, w, t, &ptdf));
      });
      const auto pw_elastic = internal::period_worst_dual_milp(
          sys, range, inst.forecast, box, t, true, opts);
      CHECK(std::abs(pw_elastic.value - enum_elastic) <=
            1e-5 * (1.0 + std::abs(enum_elastic)));
      if (!infeasible_vertex) {
        const auto pw = internal::period_worst_dual_milp(
            sys, range, inst.forecast, box, t, false, opts);
        CHECK(std::abs(pw.value - enum_cost) <=
              1e-5 * (1.0 + std::abs(enum_cost)));
        ++checked;
      }
    }
  }
  CHECK(checked > 5);
}

TEST_CASE("RUC with a zero-width box collapses to the nominal problem") {
  std::mt19937_64 rng(99);
  auto inst = toys::random_instance(rng, 1, 2);
  const UncertaintyBox zero =
      flat_box(inst.sys.num_reg_units(), inst.sys.horizon, 0.0, 0.0);
  RobustOptions opts;
  opts.ccg_gap = 1e-7;
  opts.solve.mip_gap = 1e-9;
  const RobustSolution ruc = solve_ruc(inst.sys, inst.forecast, zero, opts);
  REQUIRE(ruc.certified);

  SampleSet one;
  one.count = 1;
  one.error.push_back(toys::zero_error(inst.sys));
  SolveParams tight;
  tight.mip_gap = 1e-9;
  const Solution suc =
      solve(build_suc(inst.sys, inst.forecast, one).model, tight);
  REQUIRE(suc.status == SolveStatus::optimal);
  CHECK(std::abs(ruc.objective - suc.objective) <=
        1e-5 * (1.0 + std::abs(suc.objective)));
}

TEST_CASE("enlarging the box never decreases the RUC objective") {
  std::mt19937_64 rng(314);
  auto inst = toys::random_instance(rng, 1, 2);
  const UncertaintyBox full = uncertainty_box(inst.sys, inst.forecast);
  RobustOptions opts;
  opts.ccg_gap = 1e-7;
  opts.solve.mip_gap = 1e-9;
  double prev = -1e300;
  for (double scale : {0.0, 0.5, 1.0}) {
    UncertaintyBox box = full;
    for (auto& row : box.lower)
      for (double& v : row) v *= scale;
    for (auto& row : box.upper)
      for (double& v : row) v *= scale;
    const RobustSolution ruc = solve_ruc(inst.sys, inst.forecast, box, opts);
    REQUIRE(ruc.certified);
    CHECK(ruc.objective >= prev - 1e-5 * (1.0 + std::abs(prev)));
    prev = ruc.objective;
  }
}

TEST_CASE("C&CG bounds are monotone and certified solutions pass checks") {
  std::mt19937_64 rng(271828);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto inst = toys::random_instance(rng, 2, 3);
  const UncertaintyBox box = uncertainty_box(inst.sys, inst.forecast);
  RobustOptions opts;
  const RobustSolution ruc = solve_ruc(inst.sys, inst.forecast, box, opts);
  REQUIRE(ruc.certified);

  for (std::size_t i = 1; i < ruc.lower_history.size(); ++i)
    CHECK(ruc.lower_history[i] >= ruc.lower_history[i - 1] - 1e-9);
  for (std::size_t i = 1; i < ruc.upper_history.size(); ++i)
    CHECK(ruc.upper_history[i] <= ruc.upper_history[i - 1] + 1e-9);
  CHECK(ruc.lower_bound <=
        ruc.objective + 1e-6 * (1.0 + std::abs(ruc.objective)));

  const FeasibilityResult feas =
      feasibility_subproblem(inst.sys, ruc.range, inst.forecast, box, opts);
  CHECK(feas.violation <= opts.feas_tol);
  const ShiftFactorMatrix ptdf = compute_ptdf(inst.sys);
  for (int probe = 0; probe < 200; ++probe) {
    const int t = static_cast<int>(rng() % inst.sys.horizon);
    std::vector<double> w(inst.sys.num_reg_units());
    for (int r = 0; r < inst.sys.num_reg_units(); ++r)
      w[r] = box.lower[r][t] + (box.upper[r][t] - box.lower[r][t]) * u01(rng);
    CHECK(rt_dispatch(inst.sys, ruc.range, inst.forecast, w, t, &ptdf).feasible);
  }
}

TEST_CASE("RUC upper-bounds SUC on samples drawn inside the box") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int seed = 0; seed < 3; ++seed) {
    auto inst = toys::random_instance(rng, 1, 2);
    const UncertaintyBox box = uncertainty_box(inst.sys, inst.forecast);
    RobustOptions opts;
    opts.ccg_gap = 1e-7;
    opts.solve.mip_gap = 1e-9;
    const RobustSolution ruc = solve_ruc(inst.sys, inst.forecast, box, opts);
    REQUIRE(ruc.certified);

    SampleSet samples;
    samples.count = 4;
    for (int s = 0; s < 4; ++s) {
      auto w = toys::zero_error(inst.sys);
      for (int t = 0; t < inst.sys.horizon; ++t)
        w[0][t] =
            box.lower[0][t] + (box.upper[0][t] - box.lower[0][t]) * u01(rng);
      samples.error.push_back(w);
    }
    SolveParams tight;
    tight.mip_gap = 1e-9;
    const Solution suc =
        solve(build_suc(inst.sys, inst.forecast, samples).model, tight);
    REQUIRE(suc.status == SolveStatus::optimal);
    CHECK(ruc.objective >=
          suc.objective - 1e-5 * (1.0 + std::abs(suc.objective)));
  }
}
