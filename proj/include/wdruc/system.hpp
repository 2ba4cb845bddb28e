#ifndef WDRUC_SYSTEM_HPP
#define WDRUC_SYSTEM_HPP

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace wdruc {

/// Thrown on parse errors and invariant violations in input data; the
/// message names the offending entity and field.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct Generator {
  std::string id;
  int bus = 0;  // bus index (not external id)
  double no_load_cost = 0.0;   // $/period while committed
  double startup_cost = 0.0;   // $
  double shutdown_cost = 0.0;  // $
  double marginal_cost = 0.0;  // $/MWh
  double p_min = 0.0, p_max = 0.0;            // MW
  double ramp_up = 0.0, ramp_down = 0.0;      // MW/period
  double startup_ramp = 0.0, shutdown_ramp = 0.0;
  int min_up = 1, min_down = 1;  // periods
  bool initial_on = false;
  double initial_output = 0.0;  // MW
};

struct RegUnit {
  std::string id;
  int bus = 0;
  double capacity = 0.0;      // MW
  double curtail_cost = 0.0;  // $/MWh
};

struct LoadSeries {
  std::string name;
  int bus = 0;
  std::vector<double> demand;  // MW per period
  bool sheddable = false;
  double shed_cost = 0.0;  // $/MWh
};

struct Line {
  std::string id;
  int from_bus = 0, to_bus = 0;
  double reactance = 0.0;  // p.u.
  double capacity = 0.0;   // MW
};

struct SystemData {
  std::vector<int> bus_ids;  // external ids, position = internal index
  std::unordered_map<int, int> bus_index;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  std::vector<RegUnit> reg_units;
  std::vector<LoadSeries> loads;
  int horizon = 0;
  int reference_bus = 0;  // internal index

  int num_buses() const { return static_cast<int>(bus_ids.size()); }
  int num_generators() const { return static_cast<int>(generators.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int num_reg_units() const { return static_cast<int>(reg_units.size()); }
  int num_loads() const { return static_cast<int>(loads.size()); }
};

/// REG forecast per (unit, period), MW.
struct ForecastSeries {
  std::vector<std::vector<double>> value;  // [unit][period]
};

/// Box of forecast errors per (unit, period), MW.
struct UncertaintyBox {
  std::vector<std::vector<double>> lower, upper;  // [unit][period]

  int units() const { return static_cast<int>(lower.size()); }
  int periods() const { return lower.empty() ? 0 : static_cast<int>(lower[0].size()); }
};

/// Power shift factors: sensitivity of each line's DC flow to a 1 MW
/// injection at a bus withdrawn at the reference bus.
struct ShiftFactorMatrix {
  int buses = 0, lines = 0;
  std::vector<double> factor;  // row-major [bus][line]

  double at(int bus, int line) const { return factor[static_cast<std::size_t>(bus) * lines + line]; }
};

/// Checks every type invariant (bounds, bus references, connectivity,
/// reference-bus uniqueness is structural here).  Throws DataError naming
/// the violating entity.
void validate(const SystemData& system);

/// Parses and validates the JSON system file (see README for the schema).
SystemData load_system(const std::string& path);

/// Reads the forecast CSV: header of unit ids, one row per period.
ForecastSeries load_forecast(const std::string& path, const SystemData& system);

void validate_forecast(const SystemData& system, const ForecastSeries& forecast);

/// Standard DC power transfer distribution factors w.r.t. the reference bus.
ShiftFactorMatrix compute_ptdf(const SystemData& system);

/// Error box per (unit, period): [-forecast, capacity - forecast].
UncertaintyBox uncertainty_box(const SystemData& system,
                               const ForecastSeries& forecast);

}  // namespace wdruc

#endif  // WDRUC_SYSTEM_HPP
