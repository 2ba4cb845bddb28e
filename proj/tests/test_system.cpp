#include "doctest.h"

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <random>

#include "support/toys.hpp"
#include "wdruc/system.hpp"

using namespace wdruc;

namespace {

std::string data_path(const std::string& name) {
  return std::string(WDRUC_DATA_DIR) + "/" + name;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path.string();
}

const char* kTinySystem = R"({
  "horizon": 2,
  "reference_bus": 1,
  "buses": [1, 2],
  "generators": [
    {"id": "G1", "bus": 1, "marginal_cost": 10.0,
     "p_min": %PMIN%, "p_max": 50.0, "ramp_up": 50.0, "ramp_down": 50.0}
  ],
  "lines": [{"id": "L1", "from_bus": 1, "to_bus": 2, "reactance": 0.1, "capacity": 40.0}],
  "reg_units": [],
  "loads": [{"bus": 2, "demand": [10.0, 12.0]}]
})";

std::string tiny_system(const std::string& pmin) {
  std::string s = kTinySystem;
  s.replace(s.find("%PMIN%"), 6, pmin);
  return s;
}

}  // namespace

TEST_CASE("bundled 6-bus file loads with expected shape") {
  const SystemData sys = load_system(data_path("ieee6bus.json"));
  CHECK(sys.num_buses() == 6);
  CHECK(sys.num_generators() == 3);
  CHECK(sys.num_lines() == 7);
  CHECK(sys.num_reg_units() == 1);
  CHECK(sys.horizon == 24);
  CHECK(sys.bus_ids[sys.reference_bus] == 1);

  const ForecastSeries fc = load_forecast(data_path("pv_forecast_6bus.csv"), sys);
  CHECK(fc.value.size() == 1);
  CHECK(fc.value[0].size() == 24);
  const UncertaintyBox box = uncertainty_box(sys, fc);
  for (int t = 0; t < 24; ++t) {
    CHECK(box.lower[0][t] <= 0.0);
    CHECK(box.upper[0][t] >= 0.0);
    CHECK(box.lower[0][t] == doctest::Approx(-fc.value[0][t]));
    CHECK(box.upper[0][t] == doctest::Approx(60.0 - fc.value[0][t]));
  }
}

TEST_CASE("p_min > p_max is rejected naming the generator") {
  const auto path = write_temp("wdruc_bad_gen.json", tiny_system("80.0"));
  try {
    load_system(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("G1") != std::string::npos);
  }
}

TEST_CASE("two reference buses are rejected") {
  std::string text = tiny_system("0.0");
  text.replace(text.find("\"reference_bus\": 1"), 18, "\"reference_bus\": [1, 2]");
  const auto path = write_temp("wdruc_two_ref.json", text);
  CHECK_THROWS_AS(load_system(path), DataError);
}

TEST_CASE("disconnected network is rejected") {
  std::string text = tiny_system("0.0");
  text.replace(text.find("\"buses\": [1, 2]"), 15, "\"buses\": [1, 2, 3]");
  const auto path = write_temp("wdruc_disconnected.json", text);
  try {
    load_system(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("disconnected") != std::string::npos);
  }
}

TEST_CASE("PTDF of a 2-bus single line is +-1") {
  auto sys = toys::Builder(2, 1).line(1, 2, 0.1, 100.0).done();
  const ShiftFactorMatrix f = compute_ptdf(sys);
  // Injection at bus 2 (withdrawn at reference bus 1) flows 2->1, i.e.
  // against the line orientation.
  CHECK(f.at(1, 0) == doctest::Approx(-1.0));
  CHECK(f.at(0, 0) == doctest::Approx(0.0));  // reference row
}

TEST_CASE("PTDF of an equal-reactance triangle splits 2/3 - 1/3") {
  auto sys = toys::Builder(3, 1)
                 .line(1, 2, 0.2, 100.0)
                 .line(2, 3, 0.2, 100.0)
                 .line(1, 3, 0.2, 100.0)
                 .done();
  const ShiftFactorMatrix f = compute_ptdf(sys);
  // Hand oracle: inject 1 at bus 2, withdraw at bus 1.  With equal x on all
  // lines the reduced 2x2 susceptance system [2b -b; -b 2b][th2 th3]'=[1 0]'
  // gives th2 = 2/(3b), th3 = 1/(3b): the direct line carries 2/3, the
  // two-hop path 1/3.
  const double b = 1.0 / 0.2;
  const double th2 = 2.0 / (3.0 * b), th3 = 1.0 / (3.0 * b);
  CHECK(f.at(1, 0) == doctest::Approx((0.0 - th2) * b));  // line 1-2: -2/3
  CHECK(f.at(1, 1) == doctest::Approx((th2 - th3) * b));  // line 2-3: +1/3
  CHECK(f.at(1, 2) == doctest::Approx((0.0 - th3) * b));  // line 1-3: -1/3
  CHECK(std::abs(f.at(1, 0)) == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(f.at(1, 1)) == doctest::Approx(1.0 / 3.0));
  for (int l = 0; l < 3; ++l) CHECK(f.at(0, l) == doctest::Approx(0.0));
}

TEST_CASE("PTDF flows match a direct DC solve on random networks") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> ux(0.05, 0.3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    toys::Builder b(n, 1);
    std::vector<std::pair<int, int>> edges;
    for (int i = 2; i <= n; ++i)
      edges.emplace_back(1 + static_cast<int>(rng() % (i - 1)), i);
    for (int extra = 0; extra < n / 2; ++extra) {
      const int i = 1 + static_cast<int>(rng() % n);
      const int j = 1 + static_cast<int>(rng() % n);
      if (i != j) edges.emplace_back(i, j);
    }
    std::vector<double> react;
    for (const auto& [i, j] : edges) {
      react.push_back(ux(rng));
      b.line(i, j, react.back(), 1000.0);
    }
    const SystemData sys = b.done();
    const ShiftFactorMatrix f = compute_ptdf(sys);

    std::vector<double> inj(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      inj[i] = 20.0 * u01(rng) - 10.0;
      sum += inj[i];
    }
    inj[sys.reference_bus] -= sum;

    // Oracle: solve the reduced DC system directly.
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n - 1, n - 1);
    Eigen::VectorXd p(n - 1);
    std::vector<int> red(n, -1);
    int k = 0;
    for (int i = 0; i < n; ++i)
      if (i != sys.reference_bus) red[i] = k++;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int i = red[sys.lines[e].from_bus], j = red[sys.lines[e].to_bus];
      const double susc = 1.0 / react[e];
      if (i >= 0) B(i, i) += susc;
      if (j >= 0) B(j, j) += susc;
      if (i >= 0 && j >= 0) {
        B(i, j) -= susc;
        B(j, i) -= susc;
      }
    }
    for (int i = 0; i < n; ++i)
      if (red[i] >= 0) p(red[i]) = inj[i];
    const Eigen::VectorXd theta = B.fullPivLu().solve(p);

    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int fi = sys.lines[e].from_bus, ti = sys.lines[e].to_bus;
      const double tf = red[fi] >= 0 ? theta(red[fi]) : 0.0;
      const double tt = red[ti] >= 0 ? theta(red[ti]) : 0.0;
      const double oracle_flow = (tf - tt) / react[e];
      double ptdf_flow = 0.0;
      for (int i = 0; i < n; ++i)
        ptdf_flow += f.at(i, static_cast<int>(e)) * inj[i];
      CHECK(std::abs(ptdf_flow - oracle_flow) <= 1e-9);
    }
  }
}

TEST_CASE("uncertainty box follows the error-interval definition") {
  auto sys = toys::Builder(1, 1).pv(1, 100.0).done();
  SUBCASE("interior forecast") {
    auto fc = toys::flat_forecast(sys, 40.0);
    const UncertaintyBox box = uncertainty_box(sys, fc);
    CHECK(box.lower[0][0] == doctest::Approx(-40.0));
    CHECK(box.upper[0][0] == doctest::Approx(60.0));
  }
  SUBCASE("zero forecast") {
    auto fc = toys::flat_forecast(sys, 0.0);
    const UncertaintyBox box = uncertainty_box(sys, fc);
    CHECK(box.lower[0][0] == doctest::Approx(0.0));
    CHECK(box.upper[0][0] == doctest::Approx(100.0));
  }
  SUBCASE("forecast at capacity") {
    auto fc = toys::flat_forecast(sys, 100.0);
    const UncertaintyBox box = uncertainty_box(sys, fc);
    CHECK(box.lower[0][0] == doctest::Approx(-100.0));
    CHECK(box.upper[0][0] == doctest::Approx(0.0));
  }
}

TEST_CASE("zero error is always inside the box") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto sys = toys::Builder(1, 4).pv(1, 50.0 + 50.0 * u01(rng)).done();
    ForecastSeries fc;
    fc.value.assign(1, std::vector<double>(4));
    for (int t = 0; t < 4; ++t)
      fc.value[0][t] = sys.reg_units[0].capacity * u01(rng);
    const UncertaintyBox box = uncertainty_box(sys, fc);
    for (int t = 0; t < 4; ++t) {
      CHECK(box.lower[0][t] <= 0.0);
      CHECK(box.upper[0][t] >= 0.0);
    }
  }
}

TEST_CASE("forecast CSV with wrong shape is rejected") {
  auto sys = toys::Builder(1, 3).pv(1, 10.0).done();
  const auto short_file = write_temp("wdruc_fc_short.csv", "PV1\n1\n2\n");
  CHECK_THROWS_AS(load_forecast(short_file, sys), DataError);
  const auto bad_col = write_temp("wdruc_fc_badcol.csv", "NOPE\n1\n2\n3\n");
  CHECK_THROWS_AS(load_forecast(bad_col, sys), DataError);
}
