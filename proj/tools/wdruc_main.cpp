// wdruc: unit-commitment models under renewable uncertainty.
//
//   wdruc solve        solve one model and write the solution JSON
//   wdruc eval         evaluate a stored solution on a scenario file
//   wdruc gen-samples  draw forecast-error samples to CSV
//   wdruc run          full comparison protocol from a JSON config

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wdruc/affine.hpp"
#include "wdruc/experiments.hpp"
#include "wdruc/robust.hpp"
#include "wdruc/wasserstein.hpp"

using namespace wdruc;

namespace {

struct CommonOpts {
  std::string system_path, forecast_path;
  std::string backend = "auto";
  double mip_gap = 1e-4;
  double time_limit = 0.0;
  std::uint64_t seed = 0;
  double ccg_gap = 1e-4;
  int ccg_max_iter = 50;
};

void add_solver_flags(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--backend", c.backend, "solver backend: auto|builtin|scipy");
  cmd->add_option("--mip-gap", c.mip_gap, "relative MIP gap");
  cmd->add_option("--time-limit", c.time_limit, "solve time limit in seconds");
  cmd->add_option("--seed", c.seed, "deterministic seed");
  cmd->add_option("--ccg-gap", c.ccg_gap, "column-and-constraint relative gap");
  cmd->add_option("--ccg-max-iter", c.ccg_max_iter, "C&CG iteration limit");
}

AwdrucOptions to_options(const CommonOpts& c) {
  AwdrucOptions o;
  o.robust.solve.backend = backend_from_string(c.backend);
  o.robust.solve.mip_gap = c.mip_gap;
  if (c.time_limit > 0) o.robust.solve.time_limit = c.time_limit;
  if (c.seed != 0) o.robust.solve.seed = c.seed;
  o.robust.ccg_gap = c.ccg_gap;
  o.robust.ccg_max_iter = c.ccg_max_iter;
  return o;
}

int cmd_solve(const CommonOpts& common, const std::string& model,
              const std::string& samples_path, double epsilon, double beta,
              const std::string& output) {
  const SystemData sys = load_system(common.system_path);
  const ForecastSeries forecast = load_forecast(common.forecast_path, sys);
  const UncertaintyBox box = uncertainty_box(sys, forecast);
  const AwdrucOptions opts = to_options(common);

  SampleSet samples;
  if (!samples_path.empty()) samples = load_samples(samples_path, sys, box);
  const bool needs_samples =
      model == "suc" || model == "ewdruc" || model == "awdruc";
  if (needs_samples && samples.count == 0) {
    std::cerr << "wdruc: model '" << model << "' needs --samples\n";
    return 2;
  }

  StoredSolution stored;
  stored.model = model;
  stored.epsilon = epsilon;
  stored.beta = beta;

  if (model == "duc") {
    std::vector<std::vector<double>> zero(
        sys.num_reg_units(), std::vector<double>(sys.horizon, 0.0));
    DucModel duc = build_duc(sys, forecast, zero);
    const Solution sol = solve(duc.model, opts.robust.solve);
    if (sol.status != SolveStatus::optimal) {
      std::cerr << "wdruc: DUC solve ended with status "
                << to_string(sol.status) << "\n";
      return 1;
    }
    stored.objective = sol.objective;
    stored.certified = true;
    stored.schedule = extract_schedule(sol, duc.commitment);
    const int G = sys.num_generators(), T = sys.horizon;
    stored.range.lower.assign(G, std::vector<double>(T));
    stored.range.upper.assign(G, std::vector<double>(T));
    for (int g = 0; g < G; ++g)
      for (int t = 0; t < T; ++t)
        stored.range.lower[g][t] = stored.range.upper[g][t] =
            sol.value(duc.blocks[t].gen[g]);
  } else if (model == "suc") {
    SucModel suc = build_suc(sys, forecast, samples);
    const Solution sol = solve(suc.model, opts.robust.solve);
    if (sol.status != SolveStatus::optimal) {
      std::cerr << "wdruc: SUC solve ended with status "
                << to_string(sol.status) << "\n";
      return 1;
    }
    stored.objective = sol.objective;
    stored.certified = true;
    stored.schedule = extract_schedule(sol, suc.commitment);
    stored.range = extract_range(sol, suc.ranges);
  } else if (model == "ruc") {
    const RobustSolution sol = solve_ruc(sys, forecast, box, opts.robust);
    if (sol.status != SolveStatus::optimal) {
      std::cerr << "wdruc: RUC ended with status " << to_string(sol.status)
                << "\n";
      return 1;
    }
    stored.objective = sol.objective;
    stored.certified = sol.certified;
    stored.schedule = sol.schedule;
    stored.range = sol.range;
  } else if (model == "ewdruc") {
    const EwdrucSolution sol =
        solve_ewdruc(sys, forecast, samples, {epsilon, beta}, opts.robust);
    if (sol.status != SolveStatus::optimal) {
      std::cerr << "wdruc: E-WDRUC ended with status " << to_string(sol.status)
                << "\n";
      return 1;
    }
    stored.objective = sol.objective;
    stored.certified = sol.certified;
    stored.lambda = sol.lambda;
    stored.schedule = sol.schedule;
    stored.range = sol.range;
  } else if (model == "awdruc") {
    const AwdrucSolution sol =
        solve_awdruc(sys, forecast, samples, {epsilon, beta}, opts);
    if (sol.status != SolveStatus::optimal) {
      std::cerr << "wdruc: A-WDRUC ended with status " << to_string(sol.status)
                << "\n";
      return 1;
    }
    stored.objective = sol.objective;
    stored.certified = sol.certified();
    stored.schedule = sol.schedule;
    stored.range = sol.range;
    stored.policy = sol.policy;
    stored.has_policy = true;
    stored.affine_cuts = sol.affine_cut_count;
    stored.feasibility_cuts = sol.feasibility_cut_count;
  } else {
    std::cerr << "wdruc: unknown model '" << model << "'\n";
    return 2;
  }

  write_solution_json(output, sys, stored);
  std::printf("%s objective %.6f certified %s -> %s\n", model.c_str(),
              stored.objective, stored.certified ? "yes" : "no",
              output.c_str());
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& solution_path,
             const std::string& scenarios_path, const std::string& output) {
  const SystemData sys = load_system(common.system_path);
  const ForecastSeries forecast = load_forecast(common.forecast_path, sys);
  const StoredSolution stored = read_solution_json(solution_path, sys);

  // Evaluation scenarios may leave the physical box (true-distribution
  // draws), so they bypass the sample-set box validation.
  UncertaintyBox unbounded;
  unbounded.lower.assign(sys.num_reg_units(),
                         std::vector<double>(sys.horizon, -1e30));
  unbounded.upper.assign(sys.num_reg_units(),
                         std::vector<double>(sys.horizon, 1e30));
  const SampleSet scenarios = load_samples(scenarios_path, sys, unbounded);

  const EvaluationReport rep =
      evaluate_stored(stored, sys, forecast, scenarios);
  nlohmann::json doc;
  doc["solution"] = solution_path;
  doc["scenarios"] = scenarios.count;
  doc["mean_cost"] = rep.mean_cost;
  doc["infeasible_scenarios"] = rep.infeasible_scenarios;
  if (output.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(output);
    out << doc.dump(2) << "\n";
    std::printf("mean cost %.6f (%d infeasible) -> %s\n", rep.mean_cost,
                rep.infeasible_scenarios, output.c_str());
  }
  return 0;
}

int cmd_gen_samples(const CommonOpts& common, int count, double sigma_ratio,
                    bool no_truncate, const std::string& output) {
  const SystemData sys = load_system(common.system_path);
  const ForecastSeries forecast = load_forecast(common.forecast_path, sys);
  const UncertaintyBox box = uncertainty_box(sys, forecast);
  const SampleSet samples = generate_samples(forecast, sigma_ratio, count,
                                             common.seed, box, !no_truncate);
  save_samples(output, sys, samples);
  std::printf("%d scenarios -> %s\n", count, output.c_str());
  return 0;
}

int cmd_run(const std::string& config_path, bool full) {
  ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  if (full && cfg.seeds.size() < 50) {
    cfg.seeds.clear();
    for (int i = 0; i < 50; ++i) cfg.seeds.push_back(1000 + i);
  }
  const ComparisonReport report = run_comparison(cfg);
  std::cout << report.summary_json() << "\n";
  std::printf("%zu cells -> %s/report.csv\n", report.rows.size(),
              cfg.output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Affine-policy Wasserstein distributionally robust unit commitment"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string model = "awdruc", samples_path, solution_path, scenarios_path;
  std::string output = "solution.json", eval_output, config_path;
  double epsilon = 0.0, beta = 100.0, sigma_ratio = 0.2;
  int count = 100;
  bool no_truncate = false, full = false;

  auto* solve_cmd = app.add_subcommand("solve", "solve one model");
  solve_cmd->add_option("--system", common.system_path, "system JSON file")
      ->required();
  solve_cmd->add_option("--forecast", common.forecast_path, "forecast CSV")
      ->required();
  solve_cmd->add_option("--model", model, "duc|suc|ruc|ewdruc|awdruc")
      ->required();
  solve_cmd->add_option("--samples", samples_path, "training samples CSV");
  solve_cmd->add_option("--epsilon", epsilon, "Wasserstein radius");
  solve_cmd->add_option("--beta", beta, "confidence parameter");
  solve_cmd->add_option("--output", output, "solution JSON path");
  add_solver_flags(solve_cmd, common);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a stored solution");
  eval_cmd->add_option("--system", common.system_path)->required();
  eval_cmd->add_option("--forecast", common.forecast_path)->required();
  eval_cmd->add_option("--solution", solution_path)->required();
  eval_cmd->add_option("--scenarios", scenarios_path)->required();
  eval_cmd->add_option("--output", eval_output, "report JSON path (default stdout)");

  auto* gen_cmd = app.add_subcommand("gen-samples", "draw error scenarios");
  gen_cmd->add_option("--system", common.system_path)->required();
  gen_cmd->add_option("--forecast", common.forecast_path)->required();
  gen_cmd->add_option("--count", count, "number of scenarios");
  gen_cmd->add_option("--sigma-ratio", sigma_ratio, "stddev / forecast");
  gen_cmd->add_flag("--no-truncate", no_truncate,
                    "keep draws outside the physical error box");
  gen_cmd->add_option("--seed", common.seed, "deterministic seed");
  gen_cmd->add_option("--output", output, "samples CSV path")->required();

  auto* run_cmd = app.add_subcommand("run", "full comparison protocol");
  run_cmd->add_option("--config", config_path, "experiment config JSON")
      ->required();
  run_cmd->add_flag("--full", full, "use the 50-seed protocol");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed())
      return cmd_solve(common, model, samples_path, epsilon, beta, output);
    if (eval_cmd->parsed())
      return cmd_eval(common, solution_path, scenarios_path, eval_output);
    if (gen_cmd->parsed())
      return cmd_gen_samples(common, count, sigma_ratio, no_truncate, output);
    if (run_cmd->parsed()) return cmd_run(config_path, full);
  } catch (const std::exception& e) {
    std::cerr << "wdruc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
