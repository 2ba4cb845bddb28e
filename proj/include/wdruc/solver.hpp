#ifndef WDRUC_SOLVER_HPP
#define WDRUC_SOLVER_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wdruc {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown on malformed model input (inverted bounds, unknown variable ids)
/// and on backend failures; carries the backend message where applicable.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

enum class Sense { minimize, maximize };
enum class Relation : char { less_equal = 'L', equal = 'E', greater_equal = 'G' };

enum class SolveStatus { optimal, infeasible, unbounded, limit };

const char* to_string(SolveStatus s);

/// An LP/MILP under construction.  Rows and columns are identified by the
/// dense 0-based ids returned from add_variable/add_constraint; ids are
/// stable for the model's lifetime.
class Model {
 public:
  struct Variable {
    double lower;
    double upper;
    bool integral;
    double obj;
    std::string name;
  };
  struct Constraint {
    std::vector<std::pair<int, double>> terms;  // sorted by variable id
    Relation rel;
    double rhs;
    std::string name;
  };

  explicit Model(Sense sense = Sense::minimize) : sense_(sense) {}

  int add_variable(double lower, double upper, bool integral, double obj,
                   std::string name = {});
  /// Duplicate variable ids in `terms` are allowed; their coefficients are
  /// summed.
  int add_constraint(std::vector<std::pair<int, double>> terms, Relation rel,
                     double rhs, std::string name = {});

  void set_sense(Sense s) { sense_ = s; }
  Sense sense() const { return sense_; }

  /// Constant added to the objective value (handy for folded-out terms).
  void add_objective_offset(double c) { obj_offset_ += c; }
  double objective_offset() const { return obj_offset_; }

  void set_variable_bounds(int var, double lower, double upper);
  void set_objective_coeff(int var, double obj);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_integer_variables() const { return num_integral_; }

  const Variable& variable(int id) const { return vars_[id]; }
  const Constraint& constraint(int id) const { return rows_[id]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }

 private:
  Sense sense_;
  double obj_offset_ = 0.0;
  int num_integral_ = 0;
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

enum class Backend { automatic, builtin, scipy };

Backend backend_from_string(const std::string& name);

struct SolveParams {
  double mip_gap = 1e-4;       // relative MIP gap
  double feas_tol = 1e-6;      // feasibility tolerance
  std::optional<double> time_limit;   // seconds
  std::optional<std::uint64_t> seed;  // deterministic seed (advisory)
  Backend backend = Backend::automatic;
  long max_nodes = 5'000'000;  // builtin branch-and-bound safety cap
};

struct Solution {
  SolveStatus status = SolveStatus::limit;
  double objective = 0.0;
  std::vector<double> values;     // per variable id
  std::vector<double> row_duals;  // per constraint id; LP solves only
  int rows = 0;
  int cols = 0;
  double wall_seconds = 0.0;

  double value(int var) const { return values[var]; }
  double dual(int row) const { return row_duals[row]; }
  bool optimal() const { return status == SolveStatus::optimal; }
};

/// Solves the model with the selected backend.  `automatic` routes small
/// models to the in-process simplex/branch-and-bound and larger ones to the
/// scipy (HiGHS) worker.  Row duals follow the sensitivity convention
/// d(objective)/d(rhs); they are populated for pure LPs only.
Solution solve(const Model& model, const SolveParams& params = {});

// Individual backends, exposed for cross-checking in tests.
Solution solve_builtin(const Model& model, const SolveParams& params);
Solution solve_scipy(const Model& model, const SolveParams& params);

bool scipy_backend_available();

}  // namespace wdruc

#endif  // WDRUC_SOLVER_HPP
