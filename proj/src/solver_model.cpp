#include "wdruc/solver.hpp"

#include <algorithm>
#include <cmath>

namespace wdruc {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::limit:
      return "limit";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& name) {
  if (name == "auto" || name == "automatic") return Backend::automatic;
  if (name == "builtin") return Backend::builtin;
  if (name == "scipy" || name == "highs") return Backend::scipy;
  throw SolverError("unknown solver backend '" + name + "'");
}

int Model::add_variable(double lower, double upper, bool integral, double obj,
                        std::string name) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw SolverError("inverted bounds on variable '" + name + "' (" +
                      std::to_string(lower) + " > " + std::to_string(upper) +
                      ")");
  }
  vars_.push_back(Variable{lower, upper, integral, obj, std::move(name)});
  if (integral) ++num_integral_;
  return static_cast<int>(vars_.size()) - 1;
}

int Model::add_constraint(std::vector<std::pair<int, double>> terms,
                          Relation rel, double rhs, std::string name) {
  for (const auto& [id, coeff] : terms) {
    (void)coeff;
    if (id < 0 || id >= num_variables()) {
      throw SolverError("constraint '" + name + "' references unknown variable id " +
                        std::to_string(id));
    }
  }
  // Canonicalize: sort by id and merge duplicates by summing coefficients.
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  merged.reserve(terms.size());
  for (const auto& [id, coeff] : terms) {
    if (!merged.empty() && merged.back().first == id) {
      merged.back().second += coeff;
    } else {
      merged.emplace_back(id, coeff);
    }
  }
  rows_.push_back(Constraint{std::move(merged), rel, rhs, std::move(name)});
  return static_cast<int>(rows_.size()) - 1;
}

void Model::set_variable_bounds(int var, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw SolverError("inverted bounds on variable '" + vars_[var].name + "'");
  }
  vars_[var].lower = lower;
  vars_[var].upper = upper;
}

void Model::set_objective_coeff(int var, double obj) { vars_[var].obj = obj; }

}  // namespace wdruc
