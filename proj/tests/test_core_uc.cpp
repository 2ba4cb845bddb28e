#include "doctest.h"

#include <cmath>
#include <random>

#include "support/replay.hpp"
#include "support/toys.hpp"
#include "wdruc/core_uc.hpp"

using namespace wdruc;

namespace {

std::string data_path(const std::string& name) {
  return std::string(WDRUC_DATA_DIR) + "/" + name;
}

SolveParams tight() {
  SolveParams p;
  p.mip_gap = 1e-9;
  return p;
}

DispatchRange flat_range(int G, int T, double lo, double hi) {
  DispatchRange r;
  r.lower.assign(G, std::vector<double>(T, lo));
  r.upper.assign(G, std::vector<double>(T, hi));
  return r;
}

}  // namespace

TEST_CASE("min-up forces the second period on") {
  toys::GenSpec spec;
  spec.min_up = 2;
  auto sys = toys::Builder(1, 2).gen(1, spec).done();
  Model m;
  const CommitmentVars v = build_commitment_constraints(m, sys);
  m.set_variable_bounds(v.on[0][0], 1, 1);
  SUBCASE("on at t=2 free: feasible") {
    CHECK(solve(m, tight()).status == SolveStatus::optimal);
  }
  SUBCASE("on at t=2 forced off: infeasible") {
    m.set_variable_bounds(v.on[0][1], 0, 0);
    CHECK(solve(m, tight()).status == SolveStatus::infeasible);
  }
}

TEST_CASE("switching off forces the shut-down flag") {
  toys::GenSpec spec;
  spec.on0 = false;
  auto sys = toys::Builder(1, 2).gen(1, spec).done();
  Model m;
  const CommitmentVars v = build_commitment_constraints(m, sys);
  m.set_variable_bounds(v.on[0][0], 1, 1);
  m.set_variable_bounds(v.on[0][1], 0, 0);
  SUBCASE("down flag free: feasible with down = 1") {
    const Solution s = solve(m, tight());
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.value(v.down[0][1]) == doctest::Approx(1.0));
  }
  SUBCASE("down flag forced zero: infeasible") {
    m.set_variable_bounds(v.down[0][1], 0, 0);
    CHECK(solve(m, tight()).status == SolveStatus::infeasible);
  }
}

TEST_CASE("start-up while already on is infeasible") {
  auto sys = toys::Builder(1, 2).gen(1, {}).done();
  Model m;
  const CommitmentVars v = build_commitment_constraints(m, sys);
  m.set_variable_bounds(v.on[0][0], 1, 1);
  m.set_variable_bounds(v.up[0][1], 1, 1);
  CHECK(solve(m, tight()).status == SolveStatus::infeasible);
}

TEST_CASE("single-bus DUC with known error") {
  toys::GenSpec spec;
  spec.p_max = 100.0;
  spec.marginal = 10.0;
  auto make = [&](std::vector<double> demand) {
    return toys::Builder(1, 1).gen(1, spec).load(1, std::move(demand)).done();
  };
  SUBCASE("demand 50 at marginal cost 10 costs 500") {
    auto sys = make({50.0});
    ForecastSeries fc;
    const DucModel duc = build_duc(sys, fc, toys::zero_error(sys));
    const Solution s = solve(duc.model, tight());
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(500.0));
  }
  SUBCASE("zero demand turns everything off") {
    auto sys = make({0.0});
    ForecastSeries fc;
    const DucModel duc = build_duc(sys, fc, toys::zero_error(sys));
    const Solution s = solve(duc.model, tight());
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(0.0));
  }
}

TEST_CASE("6-bus DUC at zero error equals single-sample SUC") {
  const SystemData sys = load_system(data_path("ieee6bus.json"));
  const ForecastSeries fc = load_forecast(data_path("pv_forecast_6bus.csv"), sys);
  const DucModel duc = build_duc(sys, fc, toys::zero_error(sys));
  const Solution sd = solve(duc.model, tight());
  REQUIRE(sd.status == SolveStatus::optimal);

  SampleSet samples;
  samples.count = 1;
  samples.error.push_back(toys::zero_error(sys));
  const SucModel suc = build_suc(sys, fc, samples);
  const Solution ss = solve(suc.model, tight());
  REQUIRE(ss.status == SolveStatus::optimal);
  CHECK(std::abs(sd.objective - ss.objective) <=
        1e-6 * (1.0 + std::abs(sd.objective)));

  // Replay the DUC solution against all operational constraints.
  const CommitmentSchedule u = extract_schedule(sd, duc.commitment);
  const auto d = replay::dispatch_from_blocks(sd, duc.blocks);
  CHECK(replay::max_violation(sys, fc, toys::zero_error(sys), u, d) <= 1e-6);
}

TEST_CASE("dispatch ranges collapse to zero when the unit is off") {
  auto sys = toys::Builder(1, 1).gen(1, {}).load(1, {0.0}).done();
  Model m;
  const CommitmentVars v = build_commitment_constraints(m, sys);
  const RangeVars r = build_dispatch_range_stage(m, sys, v);
  m.set_variable_bounds(v.on[0][0], 0, 0);
  m.set_objective_coeff(r.upper[0][0], -1.0);  // maximize xmax
  const Solution s = solve(m, tight());
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.value(r.upper[0][0]) == doctest::Approx(0.0));
  CHECK(s.value(r.lower[0][0]) == doctest::Approx(0.0));
}

TEST_CASE("up-ramp link caps xmax[t] - xmin[t-1]") {
  toys::GenSpec spec;
  spec.p_max = 100.0;
  spec.ramp = 10.0;
  spec.on0 = true;
  spec.x0 = 50.0;
  auto sys = toys::Builder(1, 2).gen(1, spec).done();
  Model m;
  const CommitmentVars v = build_commitment_constraints(m, sys);
  const RangeVars r = build_dispatch_range_stage(m, sys, v);
  m.set_variable_bounds(v.on[0][0], 1, 1);
  m.set_variable_bounds(v.on[0][1], 1, 1);
  m.set_variable_bounds(v.up[0][1], 0, 0);  // no startup at t=2
  m.set_objective_coeff(r.upper[0][1], -1.0);
  m.set_objective_coeff(r.lower[0][0], 1.0);
  const Solution s = solve(m, tight());
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.value(r.upper[0][1]) - s.value(r.lower[0][0]) ==
        doctest::Approx(10.0));
}

TEST_CASE("single-period dispatch hand cases") {
  toys::GenSpec spec;
  spec.p_max = 10.0;
  spec.marginal = 10.0;
  auto sys = toys::Builder(1, 1)
                 .gen(1, spec)
                 .load(1, {5.0}, true, 1000.0)
                 .pv(1, 9.0, 1.0)
                 .done();
  auto fc = toys::flat_forecast(sys, 2.0);

  SUBCASE("zero error: generator covers the gap") {
    const auto d = rt_dispatch(sys, flat_range(1, 1, 0.0, 10.0), fc, {0.0}, 0);
    REQUIRE(d.feasible);
    CHECK(d.gen[0] == doctest::Approx(3.0));
    CHECK(d.shed[0] == doctest::Approx(0.0));
    CHECK(d.curtail[0] == doctest::Approx(0.0));
    CHECK(d.cost == doctest::Approx(30.0));
  }
  SUBCASE("surplus error is curtailed") {
    const auto d = rt_dispatch(sys, flat_range(1, 1, 0.0, 10.0), fc, {7.0}, 0);
    REQUIRE(d.feasible);
    CHECK(d.gen[0] == doctest::Approx(0.0));
    CHECK(d.curtail[0] == doctest::Approx(4.0));
    CHECK(d.cost == doctest::Approx(4.0));
  }
  SUBCASE("deficit with a capped range sheds load") {
    // Hand oracle for the 3-variable LP: supply = gen(<=2) + 2 + (-2) = gen;
    // balance forces gen = 2, shed = 3, curtail = 0.
    const auto d = rt_dispatch(sys, flat_range(1, 1, 0.0, 2.0), fc, {-2.0}, 0);
    REQUIRE(d.feasible);
    CHECK(d.gen[0] == doctest::Approx(2.0));
    CHECK(d.shed[0] == doctest::Approx(3.0));
    CHECK(d.curtail[0] == doctest::Approx(0.0));
    CHECK(d.cost == doctest::Approx(2.0 * 10.0 + 3.0 * 1000.0));
  }
}

TEST_CASE("second stage decomposes over periods") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = toys::random_instance(rng, 2, 3);
    const auto& sys = inst.sys;
    const int G = sys.num_generators(), T = sys.horizon;
    DispatchRange range = flat_range(G, T, 0.0, 0.0);
    for (int g = 0; g < G; ++g) {
      for (int t = 0; t < T; ++t) {
        range.lower[g][t] = sys.generators[g].p_min;
        range.upper[g][t] =
            range.lower[g][t] +
            (sys.generators[g].p_max - sys.generators[g].p_min) * u01(rng);
      }
    }
    std::vector<std::vector<double>> w = toys::zero_error(sys);
    const UncertaintyBox box = uncertainty_box(sys, inst.forecast);
    for (int r = 0; r < sys.num_reg_units(); ++r)
      for (int t = 0; t < T; ++t)
        w[r][t] = box.lower[r][t] + (box.upper[r][t] - box.lower[r][t]) * u01(rng);

    const SecondStageResult decomposed =
        evaluate_second_stage(sys, range, inst.forecast, w);

    // Monolithic oracle: all T dispatch blocks in one LP.
    Model mono;
    const ShiftFactorMatrix ptdf = compute_ptdf(sys);
    std::vector<double> w_t(sys.num_reg_units());
    for (int t = 0; t < T; ++t) {
      for (int r = 0; r < sys.num_reg_units(); ++r) w_t[r] = w[r][t];
      add_dispatch_block(mono, sys, ptdf, inst.forecast, w_t, t, nullptr,
                         &range, 1.0);
    }
    const Solution ms = solve(mono, tight());
    if (decomposed.feasible) {
      REQUIRE(ms.status == SolveStatus::optimal);
      CHECK(std::abs(decomposed.cost - ms.objective) <=
            1e-6 * (1.0 + std::abs(ms.objective)));
    } else {
      CHECK(ms.status == SolveStatus::infeasible);
    }
  }
}

TEST_CASE("duplicated SUC sample changes nothing") {
  std::mt19937_64 rng(77);
  auto inst = toys::random_instance(rng, 1, 2);
  const UncertaintyBox box = uncertainty_box(inst.sys, inst.forecast);
  std::vector<std::vector<double>> w = toys::zero_error(inst.sys);
  for (int t = 0; t < inst.sys.horizon; ++t) w[0][t] = 0.5 * box.lower[0][t];

  SampleSet one;
  one.count = 1;
  one.error.push_back(w);
  SampleSet two;
  two.count = 2;
  two.error.push_back(w);
  two.error.push_back(w);

  const Solution s1 = solve(build_suc(inst.sys, inst.forecast, one).model, tight());
  const Solution s2 = solve(build_suc(inst.sys, inst.forecast, two).model, tight());
  REQUIRE(s1.status == SolveStatus::optimal);
  REQUIRE(s2.status == SolveStatus::optimal);
  CHECK(std::abs(s1.objective - s2.objective) <=
        1e-6 * (1.0 + std::abs(s1.objective)));
}

TEST_CASE("SUC rows grow affinely in the sample count") {
  const SystemData sys = load_system(data_path("ieee6bus.json"));
  const ForecastSeries fc = load_forecast(data_path("pv_forecast_6bus.csv"), sys);
  auto rows_for = [&](int S) {
    SampleSet samples;
    samples.count = S;
    for (int s = 0; s < S; ++s) samples.error.push_back(toys::zero_error(sys));
    return build_suc(sys, fc, samples).model.num_constraints();
  };
  const long r1 = rows_for(1), r5 = rows_for(5), r20 = rows_for(20);
  const long per_sample = (r5 - r1) / 4;
  CHECK((r5 - r1) % 4 == 0);
  CHECK(r20 == r1 + 19 * per_sample);
  CHECK(per_sample > 0);
}

TEST_CASE("feasible ranges admit every per-period dispatch independently") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto inst = toys::random_instance(rng, 2, 3);
  const auto& sys = inst.sys;

  SampleSet samples;
  samples.count = 3;
  const UncertaintyBox box = uncertainty_box(sys, inst.forecast);
  for (int s = 0; s < 3; ++s) {
    auto w = toys::zero_error(sys);
    for (int t = 0; t < sys.horizon; ++t)
      w[0][t] = box.lower[0][t] + (box.upper[0][t] - box.lower[0][t]) * u01(rng);
    samples.error.push_back(w);
  }
  const SucModel suc = build_suc(sys, inst.forecast, samples);
  const Solution sol = solve(suc.model, tight());
  REQUIRE(sol.status == SolveStatus::optimal);
  const DispatchRange range = extract_range(sol, suc.ranges);
  const CommitmentSchedule u = extract_schedule(sol, suc.commitment);

  // Non-anticipativity surrogate: 100 random per-period errors, dispatched
  // independently, all feasible.
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  for (int probe = 0; probe < 100; ++probe) {
    const int t = static_cast<int>(rng() % sys.horizon);
    std::vector<double> w_t(sys.num_reg_units());
    for (int r = 0; r < sys.num_reg_units(); ++r)
      w_t[r] = box.lower[r][t] + (box.upper[r][t] - box.lower[r][t]) * u01(rng);
    CHECK(rt_dispatch(sys, range, inst.forecast, w_t, t, &ptdf).feasible);
  }

  // Extreme range points satisfy the generator ramp constraints.
  for (int g = 0; g < sys.num_generators(); ++g) {
    const auto& gen = sys.generators[g];
    for (int t = 0; t < sys.horizon; ++t) {
      const double prev_min =
          t == 0 ? gen.initial_output : range.lower[g][t - 1];
      const double prev_max =
          t == 0 ? gen.initial_output : range.upper[g][t - 1];
      const int prev_on = t == 0 ? (gen.initial_on ? 1 : 0) : u.on[g][t - 1];
      CHECK(range.upper[g][t] - prev_min <=
            gen.ramp_up * prev_on + gen.startup_ramp * u.up[g][t] + 1e-6);
      CHECK(prev_max - range.lower[g][t] <=
            gen.ramp_down * u.on[g][t] + gen.shutdown_ramp * u.down[g][t] + 1e-6);
    }
  }

  // Replay each sample's dispatch against the full constraint set.
  for (int s = 0; s < samples.count; ++s) {
    const auto d = replay::dispatch_from_blocks(sol, suc.blocks[s]);
    CHECK(replay::max_violation(sys, inst.forecast, samples.error[s], u, d) <=
          1e-6);
  }
}
