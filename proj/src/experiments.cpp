#include "wdruc/experiments.hpp"

#include <algorithm>
#include <random>
#include <limits>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace wdruc {

namespace {

using nlohmann::json;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

/// Deterministic standard normal: Box-Muller on explicit 53-bit uniforms,
/// so streams do not depend on the standard library's distribution
/// implementation.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
};

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double rank = q * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::string sanitized(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

SampleSet generate_samples(const ForecastSeries& forecast, double sigma_ratio,
                           int count, std::uint64_t seed,
                           const UncertaintyBox& box, bool truncate) {
  if (sigma_ratio < 0) throw DataError("sigma_ratio must be >= 0");
  if (count < 1) throw DataError("sample count must be >= 1");
  const int R = box.units();
  const int T = box.periods();
  NormalStream normal(seed);
  SampleSet out;
  out.count = count;
  out.error.reserve(count);
  for (int s = 0; s < count; ++s) {
    std::vector<std::vector<double>> w(R, std::vector<double>(T, 0.0));
    for (int r = 0; r < R; ++r) {
      for (int t = 0; t < T; ++t) {
        const double sd = sigma_ratio * forecast.value[r][t];
        double draw = sd * normal.next();
        if (truncate) {
          int tries = 0;
          while ((draw < box.lower[r][t] || draw > box.upper[r][t]) &&
                 ++tries < 1000) {
            draw = sd * normal.next();
          }
          draw = std::clamp(draw, box.lower[r][t], box.upper[r][t]);
        }
        w[r][t] = draw;
      }
    }
    out.error.push_back(std::move(w));
  }
  return out;
}

HoldoutResult select_epsilon_holdout(const SystemData& sys,
                                     const ForecastSeries& forecast,
                                     const SampleSet& samples,
                                     std::vector<double> grid, double split,
                                     double beta, const AwdrucOptions& opts) {
  if (grid.empty()) throw DataError("holdout grid must be nonempty");
  if (!(split > 0.0 && split < 1.0))
    throw DataError("holdout split must lie in (0, 1)");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const int S = samples.count;
  const int train_n = std::clamp(
      static_cast<int>(std::lround(split * S)), 1, S - 1);
  SampleSet train, valid;
  train.count = train_n;
  valid.count = S - train_n;
  for (int s = 0; s < S; ++s)
    (s < train_n ? train : valid).error.push_back(samples.error[s]);

  HoldoutResult result;
  bool have_best = false;
  for (double eps : grid) {
    HoldoutEntry entry;
    entry.epsilon = eps;
    const AwdrucSolution sol =
        solve_awdruc(sys, forecast, train, {eps, beta}, opts);
    entry.certified = sol.certified();
    if (!entry.certified) {
      std::fprintf(stderr,
                   "wdruc: holdout: radius %g skipped (training solve not "
                   "certified, status %s)\n",
                   eps, to_string(sol.status));
      result.table.push_back(entry);
      continue;
    }
    const EvaluationReport rep =
        evaluate_awdruc(sol, sys, forecast, valid.error);
    entry.validation_cost = rep.mean_cost;
    result.table.push_back(entry);
    if (!have_best || entry.validation_cost <
                          result.table[0].validation_cost - 0.0) {
      // handled below; placeholder to keep entry order
    }
    have_best = true;
  }
  // Argmin over certified entries; ties keep the smaller radius (grid is
  // sorted ascending and comparison is strict).
  bool found = false;
  double best_cost = 0.0;
  for (const auto& entry : result.table) {
    if (!entry.certified) continue;
    if (!found || entry.validation_cost < best_cost - 1e-12) {
      best_cost = entry.validation_cost;
      result.best_epsilon = entry.epsilon;
      found = true;
    }
  }
  if (!found)
    throw SolverError("holdout failed: no radius produced a certified solve");
  return result;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("parse error in config '" + path + "': " + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.system_path = doc.at("system").get<std::string>();
    cfg.forecast_path = doc.at("forecast").get<std::string>();
    cfg.models = doc.value("models", std::vector<std::string>{"awdruc"});
    cfg.sample_count = doc.value("samples", 10);
    cfg.eval_count = doc.value("eval_scenarios", 10000);
    if (doc.contains("seeds"))
      cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    cfg.sigma_ratio = doc.value("sigma_ratio", 0.2);
    if (doc.contains("epsilon") && doc["epsilon"].is_number())
      cfg.epsilon = doc["epsilon"].get<double>();
    cfg.epsilon_grid = doc.value(
        "epsilon_grid",
        std::vector<double>{0.001, 0.005, 0.01, 0.05, 0.1, 0.5});
    cfg.beta = doc.value("beta", 100.0);
    cfg.holdout_split = doc.value("holdout_split", 0.7);
    cfg.output_dir = doc.value("output_dir", ".");
    cfg.full_scale = doc.value("full", false);
    if (doc.contains("solver")) {
      const auto& s = doc["solver"];
      if (s.contains("backend"))
        cfg.awdruc.robust.solve.backend =
            backend_from_string(s["backend"].get<std::string>());
      cfg.awdruc.robust.solve.mip_gap =
          s.value("mip_gap", cfg.awdruc.robust.solve.mip_gap);
      if (s.contains("time_limit"))
        cfg.awdruc.robust.solve.time_limit = s["time_limit"].get<double>();
    }
    if (doc.contains("ccg")) {
      const auto& c = doc["ccg"];
      cfg.awdruc.robust.ccg_gap = c.value("gap", cfg.awdruc.robust.ccg_gap);
      cfg.awdruc.robust.ccg_max_iter =
          c.value("max_iter", cfg.awdruc.robust.ccg_max_iter);
    }
  } catch (const json::exception& e) {
    throw DataError("schema error in config '" + path + "': " + e.what());
  }
  if (cfg.seeds.empty()) {
    const int n = cfg.full_scale ? 50 : 10;
    for (int i = 0; i < n; ++i) cfg.seeds.push_back(1000 + i);
  }
  cfg.check();
  return cfg;
}

void ExperimentConfig::check() const {
  if (sample_count < 1) throw DataError("config: samples must be >= 1");
  if (!(holdout_split > 0.0 && holdout_split < 1.0))
    throw DataError("config: holdout_split must lie in (0, 1)");
  if (!epsilon && epsilon_grid.empty())
    throw DataError("config: need a fixed epsilon or a nonempty grid");
  static const std::set<std::string> known{"duc", "suc", "ruc", "ewdruc",
                                           "awdruc"};
  for (const auto& m : models)
    if (!known.count(m)) throw DataError("config: unknown model '" + m + "'");
  if (models.empty()) throw DataError("config: model list is empty");
}

std::vector<Aggregate> ComparisonReport::aggregates() const {
  std::vector<Aggregate> out;
  std::vector<std::string> order;
  for (const auto& row : rows)
    if (std::find(order.begin(), order.end(), row.model) == order.end())
      order.push_back(row.model);
  for (const auto& model : order) {
    Aggregate a;
    a.model = model;
    std::vector<double> costs;
    for (const auto& row : rows) {
      if (row.model != model || !row.error.empty()) continue;
      costs.push_back(row.eval_mean_cost);
    }
    a.cells = static_cast<int>(costs.size());
    if (!costs.empty()) {
      double sum = 0.0;
      for (double c : costs) sum += c;
      a.mean = sum / static_cast<double>(costs.size());
      a.p25 = percentile(costs, 0.25);
      a.p75 = percentile(costs, 0.75);
    }
    out.push_back(a);
  }
  return out;
}

std::string ComparisonReport::to_csv() const {
  std::string csv =
      "model,seed,samples,epsilon,objective,eval_mean_cost,eval_infeasible,"
      "certified,master_rows,master_cols,iterations,error\n";
  for (const auto& r : rows) {
    csv += r.model + ',' + std::to_string(r.seed) + ',' +
           std::to_string(r.sample_count) + ',' + fmt(r.epsilon_used) + ',' +
           fmt(r.objective) + ',' + fmt(r.eval_mean_cost) + ',' +
           std::to_string(r.eval_infeasible) + ',' +
           (r.certified ? "1" : "0") + ',' + std::to_string(r.master_rows) +
           ',' + std::to_string(r.master_cols) + ',' +
           std::to_string(r.iterations) + ',' + sanitized(r.error) + '\n';
  }
  return csv;
}

std::string ComparisonReport::timings_csv() const {
  std::string csv = "model,seed,samples,wall_seconds\n";
  for (const auto& r : rows) {
    csv += r.model + ',' + std::to_string(r.seed) + ',' +
           std::to_string(r.sample_count) + ',' + fmt(r.wall_seconds) + '\n';
  }
  return csv;
}

std::string ComparisonReport::summary_json() const {
  json doc;
  doc["cells"] = rows.size();
  json aggs = json::array();
  for (const auto& a : aggregates()) {
    aggs.push_back({{"model", a.model},
                    {"cells", a.cells},
                    {"eval_mean_cost", {{"mean", a.mean},
                                        {"p25", a.p25},
                                        {"p75", a.p75}}}});
  }
  doc["aggregates"] = aggs;
  return doc.dump(2);
}

namespace {

std::vector<std::vector<double>> zero_error_of(const SystemData& sys) {
  return std::vector<std::vector<double>>(
      sys.num_reg_units(), std::vector<double>(sys.horizon, 0.0));
}

CellResult solve_one_cell(const std::string& model, const SystemData& sys,
                          const ForecastSeries& forecast,
                          const SampleSet& samples, double epsilon,
                          const ExperimentConfig& cfg,
                          DispatchRange& range_out,
                          CommitmentSchedule& schedule_out) {
  CellResult cell;
  cell.model = model;
  cell.sample_count = samples.count;
  cell.epsilon_used = epsilon;
  const double t0 = now_seconds();
  const UncertaintyBox box = uncertainty_box(sys, forecast);

  if (model == "duc") {
    DucModel duc = build_duc(sys, forecast, zero_error_of(sys));
    const Solution sol = solve(duc.model, cfg.awdruc.robust.solve);
    if (sol.status != SolveStatus::optimal)
      throw SolverError(std::string("DUC solve: ") + to_string(sol.status));
    cell.objective = sol.objective;
    cell.certified = true;
    cell.master_rows = duc.model.num_constraints();
    cell.master_cols = duc.model.num_variables();
    cell.iterations = 1;
    schedule_out = extract_schedule(sol, duc.commitment);
    // Degenerate ranges at the deterministic dispatch path.
    const int G = sys.num_generators(), T = sys.horizon;
    range_out.lower.assign(G, std::vector<double>(T));
    range_out.upper.assign(G, std::vector<double>(T));
    for (int g = 0; g < G; ++g)
      for (int t = 0; t < T; ++t) {
        const double x = sol.value(duc.blocks[t].gen[g]);
        range_out.lower[g][t] = range_out.upper[g][t] = x;
      }
  } else if (model == "suc") {
    SucModel suc = build_suc(sys, forecast, samples);
    const Solution sol = solve(suc.model, cfg.awdruc.robust.solve);
    if (sol.status != SolveStatus::optimal)
      throw SolverError(std::string("SUC solve: ") + to_string(sol.status));
    cell.objective = sol.objective;
    cell.certified = true;
    cell.master_rows = suc.model.num_constraints();
    cell.master_cols = suc.model.num_variables();
    cell.iterations = 1;
    schedule_out = extract_schedule(sol, suc.commitment);
    range_out = extract_range(sol, suc.ranges);
  } else if (model == "ruc") {
    const RobustSolution sol = solve_ruc(sys, forecast, box, cfg.awdruc.robust);
    if (sol.status != SolveStatus::optimal)
      throw SolverError(std::string("RUC solve: ") + to_string(sol.status));
    cell.objective = sol.objective;
    cell.certified = sol.certified;
    cell.master_rows = sol.master_rows;
    cell.master_cols = sol.master_cols;
    cell.iterations = sol.iterations;
    schedule_out = sol.schedule;
    range_out = sol.range;
  } else if (model == "ewdruc") {
    const EwdrucSolution sol = solve_ewdruc(sys, forecast, samples,
                                            {epsilon, cfg.beta},
                                            cfg.awdruc.robust);
    if (sol.status != SolveStatus::optimal)
      throw SolverError(std::string("E-WDRUC solve: ") + to_string(sol.status));
    cell.objective = sol.objective;
    cell.certified = sol.certified;
    cell.master_rows = sol.master_rows;
    cell.master_cols = sol.master_cols;
    cell.iterations = sol.iterations;
    schedule_out = sol.schedule;
    range_out = sol.range;
  } else if (model == "awdruc") {
    const AwdrucSolution sol =
        solve_awdruc(sys, forecast, samples, {epsilon, cfg.beta}, cfg.awdruc);
    if (sol.status != SolveStatus::optimal)
      throw SolverError(std::string("A-WDRUC solve: ") + to_string(sol.status));
    cell.objective = sol.objective;
    cell.certified = sol.certified();
    cell.master_rows = sol.master_rows;
    cell.master_cols = sol.master_cols;
    cell.iterations = sol.iterations;
    schedule_out = sol.schedule;
    range_out = sol.range;
  } else {
    throw DataError("unknown model '" + model + "'");
  }
  cell.wall_seconds = now_seconds() - t0;
  return cell;
}

}  // namespace

ComparisonReport run_comparison(const ExperimentConfig& cfg) {
  cfg.check();
  const SystemData sys = load_system(cfg.system_path);
  const ForecastSeries forecast = load_forecast(cfg.forecast_path, sys);
  const UncertaintyBox box = uncertainty_box(sys, forecast);
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);

  ComparisonReport report;
  for (const std::uint64_t seed : cfg.seeds) {
    const SampleSet train = generate_samples(forecast, cfg.sigma_ratio,
                                             cfg.sample_count, seed, box, true);
    // Evaluation scenarios come from the untruncated true distribution.
    const SampleSet eval = generate_samples(forecast, cfg.sigma_ratio,
                                            cfg.eval_count, seed ^ 0x9E3779B9,
                                            box, false);

    double epsilon = cfg.epsilon.value_or(0.0);
    if (!cfg.epsilon && (std::find(cfg.models.begin(), cfg.models.end(),
                                   "awdruc") != cfg.models.end() ||
                         std::find(cfg.models.begin(), cfg.models.end(),
                                   "ewdruc") != cfg.models.end())) {
      const HoldoutResult holdout = select_epsilon_holdout(
          sys, forecast, train, cfg.epsilon_grid, cfg.holdout_split, cfg.beta,
          cfg.awdruc);
      epsilon = holdout.best_epsilon;
    }

    for (const std::string& model : cfg.models) {
      CellResult cell;
      DispatchRange range;
      CommitmentSchedule schedule;
      try {
        cell = solve_one_cell(model, sys, forecast, train, epsilon, cfg, range,
                              schedule);
        // Out-of-sample evaluation with exact recourse.
        double total = 0.0;
        int feasible = 0;
        for (int s = 0; s < eval.count; ++s) {
          const SecondStageResult r = evaluate_second_stage(
              sys, range, forecast, eval.error[s], &ptdf);
          if (!r.feasible) {
            ++cell.eval_infeasible;
            continue;
          }
          total += fixed_cost(sys, schedule) + r.cost;
          ++feasible;
        }
        cell.eval_mean_cost = feasible > 0 ? total / feasible : 0.0;
      } catch (const std::exception& e) {
        cell.model = model;
        cell.sample_count = cfg.sample_count;
        cell.epsilon_used = epsilon;
        cell.error = e.what();
        std::fprintf(stderr, "wdruc: cell (%s, seed %llu) failed: %s\n",
                     model.c_str(), static_cast<unsigned long long>(seed),
                     e.what());
      }
      cell.seed = seed;
      report.rows.push_back(std::move(cell));
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  std::ofstream(fs::path(cfg.output_dir) / "report.csv") << report.to_csv();
  std::ofstream(fs::path(cfg.output_dir) / "timings.csv")
      << report.timings_csv();
  std::ofstream(fs::path(cfg.output_dir) / "summary.json")
      << report.summary_json() << '\n';
  return report;
}

namespace {

json series_json(const std::vector<std::vector<double>>& v) {
  json out = json::array();
  for (const auto& row : v) out.push_back(row);
  return out;
}

std::vector<std::vector<double>> series_from(const json& j) {
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(row.get<std::vector<double>>());
  return out;
}

}  // namespace

void write_solution_json(const std::string& path, const SystemData& sys,
                         const StoredSolution& s) {
  json doc;
  doc["model"] = s.model;
  doc["objective"] = s.objective;
  doc["epsilon"] = s.epsilon;
  doc["beta"] = s.beta;
  doc["certified"] = s.certified;
  doc["cuts"] = {{"affine", s.affine_cuts}, {"feasibility", s.feasibility_cuts}};
  if (s.model == "ewdruc") doc["lambda"] = s.lambda;
  json gens = json::object();
  for (int g = 0; g < sys.num_generators(); ++g) {
    const auto& id = sys.generators[g].id;
    gens[id] = {{"on", s.schedule.on[g]},
                {"up", s.schedule.up[g]},
                {"down", s.schedule.down[g]},
                {"range_min", s.range.lower[g]},
                {"range_max", s.range.upper[g]}};
  }
  doc["generators"] = gens;
  if (s.has_policy) {
    json pol;
    pol["gen_slope"] = series_json(s.policy.gen_slope);
    pol["gen_intercept"] = series_json(s.policy.gen_icept);
    pol["load_slope"] = series_json(s.policy.load_slope);
    pol["load_intercept"] = series_json(s.policy.load_icept);
    pol["reg_slope"] = series_json(s.policy.reg_slope);
    pol["reg_intercept"] = series_json(s.policy.reg_icept);
    doc["affine_policy"] = pol;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write solution file '" + path + "'");
  out << doc.dump(2) << '\n';
}

StoredSolution read_solution_json(const std::string& path,
                                  const SystemData& sys) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open solution file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("parse error in solution '" + path + "': " + e.what());
  }
  StoredSolution s;
  try {
    s.model = doc.at("model").get<std::string>();
    s.objective = doc.value("objective", 0.0);
    s.epsilon = doc.value("epsilon", 0.0);
    s.beta = doc.value("beta", 0.0);
    s.certified = doc.value("certified", false);
    s.lambda = doc.value("lambda", 0.0);
    if (doc.contains("cuts")) {
      s.affine_cuts = doc["cuts"].value("affine", 0);
      s.feasibility_cuts = doc["cuts"].value("feasibility", 0);
    }
    const int G = sys.num_generators();
    s.schedule.on.resize(G);
    s.schedule.up.resize(G);
    s.schedule.down.resize(G);
    s.range.lower.resize(G);
    s.range.upper.resize(G);
    for (int g = 0; g < G; ++g) {
      const auto& gj = doc.at("generators").at(sys.generators[g].id);
      s.schedule.on[g] = gj.at("on").get<std::vector<int>>();
      s.schedule.up[g] = gj.at("up").get<std::vector<int>>();
      s.schedule.down[g] = gj.at("down").get<std::vector<int>>();
      s.range.lower[g] = gj.at("range_min").get<std::vector<double>>();
      s.range.upper[g] = gj.at("range_max").get<std::vector<double>>();
    }
    if (doc.contains("affine_policy")) {
      const auto& pol = doc["affine_policy"];
      s.policy.gen_slope = series_from(pol.at("gen_slope"));
      s.policy.gen_icept = series_from(pol.at("gen_intercept"));
      s.policy.load_slope = series_from(pol.at("load_slope"));
      s.policy.load_icept = series_from(pol.at("load_intercept"));
      s.policy.reg_slope = series_from(pol.at("reg_slope"));
      s.policy.reg_icept = series_from(pol.at("reg_intercept"));
      s.has_policy = true;
    }
  } catch (const json::exception& e) {
    throw DataError("schema error in solution '" + path + "': " + e.what());
  }
  return s;
}

EvaluationReport evaluate_stored(const StoredSolution& solution,
                                 const SystemData& sys,
                                 const ForecastSeries& forecast,
                                 const SampleSet& scenarios) {
  const ShiftFactorMatrix ptdf = compute_ptdf(sys);
  EvaluationReport rep;
  double total = 0.0;
  int feasible = 0;
  for (int s = 0; s < scenarios.count; ++s) {
    const SecondStageResult r = evaluate_second_stage(
        sys, solution.range, forecast, scenarios.error[s], &ptdf);
    if (!r.feasible) {
      ++rep.infeasible_scenarios;
      rep.scenario_cost.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double cost = fixed_cost(sys, solution.schedule) + r.cost;
    rep.scenario_cost.push_back(cost);
    total += cost;
    ++feasible;
  }
  rep.mean_cost = feasible > 0 ? total / feasible : 0.0;
  return rep;
}

}  // namespace wdruc
