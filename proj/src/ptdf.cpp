#include <Eigen/Dense>

#include "wdruc/system.hpp"

namespace wdruc {

ShiftFactorMatrix compute_ptdf(const SystemData& sys) {
  const int nb = sys.num_buses();
  const int nl = sys.num_lines();
  ShiftFactorMatrix sf;
  sf.buses = nb;
  sf.lines = nl;
  sf.factor.assign(static_cast<std::size_t>(nb) * nl, 0.0);
  if (nl == 0 || nb == 1) return sf;

  // Susceptance matrix with the reference bus removed.
  std::vector<int> red(nb, -1);  // bus -> reduced index
  int k = 0;
  for (int b = 0; b < nb; ++b)
    if (b != sys.reference_bus) red[b] = k++;

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
  for (const auto& ln : sys.lines) {
    const double b = 1.0 / ln.reactance;
    const int i = red[ln.from_bus], j = red[ln.to_bus];
    if (i >= 0) B(i, i) += b;
    if (j >= 0) B(j, j) += b;
    if (i >= 0 && j >= 0) {
      B(i, j) -= b;
      B(j, i) -= b;
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  // Theta columns: angles for a unit injection at each non-reference bus.
  Eigen::MatrixXd theta = lu.solve(Eigen::MatrixXd::Identity(nb - 1, nb - 1));
  if (!theta.allFinite() ||
      (B * theta - Eigen::MatrixXd::Identity(nb - 1, nb - 1)).cwiseAbs()
              .maxCoeff() > 1e-6)
    throw DataError("singular susceptance matrix (degenerate network)");

  for (int bus = 0; bus < nb; ++bus) {
    if (bus == sys.reference_bus) continue;  // reference row stays zero
    const int col = red[bus];
    for (int l = 0; l < nl; ++l) {
      const auto& ln = sys.lines[l];
      const double ti = red[ln.from_bus] >= 0 ? theta(red[ln.from_bus], col) : 0.0;
      const double tj = red[ln.to_bus] >= 0 ? theta(red[ln.to_bus], col) : 0.0;
      sf.factor[static_cast<std::size_t>(bus) * nl + l] =
          (ti - tj) / sys.lines[l].reactance;
    }
  }
  return sf;
}

}  // namespace wdruc
