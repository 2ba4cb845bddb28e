#ifndef WDRUC_EXPERIMENTS_HPP
#define WDRUC_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdruc/affine.hpp"
#include "wdruc/core_uc.hpp"
#include "wdruc/robust.hpp"
#include "wdruc/system.hpp"
#include "wdruc/wasserstein.hpp"

namespace wdruc {

struct ExperimentConfig {
  std::string system_path;
  std::string forecast_path;
  std::vector<std::string> models;  // subset of duc, suc, ruc, ewdruc, awdruc
  int sample_count = 10;            // S
  int eval_count = 10000;
  std::vector<std::uint64_t> seeds;
  double sigma_ratio = 0.2;
  std::optional<double> epsilon;     // fixed radius; empty -> holdout
  std::vector<double> epsilon_grid;  // holdout grid
  double beta = 100.0;
  double holdout_split = 0.7;
  std::string output_dir = ".";
  bool full_scale = false;  // 50 seeds instead of the desk-scale default 10
  AwdrucOptions awdruc;     // carries solver + C&CG settings for all models

  static ExperimentConfig from_json_file(const std::string& path);
  void check() const;
};

struct CellResult {
  std::string model;
  std::uint64_t seed = 0;
  int sample_count = 0;
  double epsilon_used = 0.0;
  double objective = 0.0;
  double eval_mean_cost = 0.0;
  int eval_infeasible = 0;
  bool certified = false;
  int master_rows = 0, master_cols = 0;
  int iterations = 0;
  double wall_seconds = 0.0;  // reported in timings.csv, outside the
                              // byte-determinism contract
  std::string error;          // nonempty when the cell failed
};

struct Aggregate {
  std::string model;
  int cells = 0;
  double mean = 0.0, p25 = 0.0, p75 = 0.0;  // of evaluated mean cost
};

struct ComparisonReport {
  std::vector<CellResult> rows;

  std::vector<Aggregate> aggregates() const;
  /// Deterministic columns only (no wall times).
  std::string to_csv() const;
  std::string timings_csv() const;
  std::string summary_json() const;
};

struct HoldoutEntry {
  double epsilon = 0.0;
  double validation_cost = 0.0;
  bool certified = false;
};

struct HoldoutResult {
  double best_epsilon = 0.0;
  std::vector<HoldoutEntry> table;
};

/// Independent truncated-normal draws per (unit, period) with standard
/// deviation sigma_ratio * forecast; deterministic in the seed.  With
/// truncate=false the raw normal draws are kept (evaluation scenarios).
SampleSet generate_samples(const ForecastSeries& forecast, double sigma_ratio,
                           int count, std::uint64_t seed,
                           const UncertaintyBox& box, bool truncate = true);

/// Trains the affine model on the first split of the samples for each grid
/// radius and scores mean exact-recourse cost on the held-out rest;
/// returns the argmin (ties -> smaller radius).
HoldoutResult select_epsilon_holdout(const SystemData& sys,
                                     const ForecastSeries& forecast,
                                     const SampleSet& samples,
                                     std::vector<double> grid, double split,
                                     double beta, const AwdrucOptions& opts);

/// Full comparison protocol: per seed, draw training samples, solve the
/// requested models, evaluate on freshly drawn (untruncated) scenarios,
/// and write report.csv / timings.csv / summary.json to the output dir.
ComparisonReport run_comparison(const ExperimentConfig& config);

/// A solved first stage as persisted by the CLI: everything needed to
/// rerun the exact-recourse evaluation.
struct StoredSolution {
  std::string model;
  double objective = 0.0;
  double epsilon = 0.0, beta = 0.0;
  bool certified = false;
  double lambda = 0.0;  // exact model only
  int affine_cuts = 0, feasibility_cuts = 0;
  CommitmentSchedule schedule;
  DispatchRange range;
  AffinePolicy policy;  // affine model only; empty otherwise
  bool has_policy = false;
};

void write_solution_json(const std::string& path, const SystemData& sys,
                         const StoredSolution& solution);
StoredSolution read_solution_json(const std::string& path,
                                  const SystemData& sys);

/// Mean exact-recourse cost of a stored solution over the scenarios.
EvaluationReport evaluate_stored(const StoredSolution& solution,
                                 const SystemData& sys,
                                 const ForecastSeries& forecast,
                                 const SampleSet& scenarios);

}  // namespace wdruc

#endif  // WDRUC_EXPERIMENTS_HPP
