#include "wdruc/system.hpp"

#include <fstream>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wdruc {

namespace {

using nlohmann::json;

int resolve_bus(const SystemData& sys, int external_id,
                const std::string& owner) {
  auto it = sys.bus_index.find(external_id);
  if (it == sys.bus_index.end())
    throw DataError(owner + " references unknown bus " +
                    std::to_string(external_id));
  return it->second;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

void validate(const SystemData& sys) {
  if (sys.horizon < 1) throw DataError("horizon must be >= 1");
  if (sys.bus_ids.empty()) throw DataError("system has no buses");
  if (sys.reference_bus < 0 || sys.reference_bus >= sys.num_buses())
    throw DataError("reference bus index out of range");

  for (const auto& g : sys.generators) {
    if (g.bus < 0 || g.bus >= sys.num_buses())
      throw DataError("generator " + g.id + ": bad bus index");
    if (g.p_min < 0 || g.p_min > g.p_max)
      throw DataError("generator " + g.id +
                      ": requires 0 <= p_min <= p_max, got [" +
                      std::to_string(g.p_min) + ", " + std::to_string(g.p_max) +
                      "]");
    if (g.ramp_up < 0 || g.ramp_down < 0 || g.startup_ramp < 0 ||
        g.shutdown_ramp < 0)
      throw DataError("generator " + g.id + ": ramp limits must be >= 0");
    if (g.min_up < 1 || g.min_down < 1)
      throw DataError("generator " + g.id + ": min up/down times must be >= 1");
    if (g.initial_on) {
      if (g.initial_output < g.p_min - 1e-9 || g.initial_output > g.p_max + 1e-9)
        throw DataError("generator " + g.id +
                        ": initial_output outside [p_min, p_max]");
    } else if (g.initial_output != 0.0) {
      throw DataError("generator " + g.id +
                      ": initial_output must be 0 when initially off");
    }
  }
  for (const auto& r : sys.reg_units) {
    if (r.bus < 0 || r.bus >= sys.num_buses())
      throw DataError("reg unit " + r.id + ": bad bus index");
    if (r.capacity < 0)
      throw DataError("reg unit " + r.id + ": capacity must be >= 0");
  }
  for (const auto& l : sys.loads) {
    if (l.bus < 0 || l.bus >= sys.num_buses())
      throw DataError("load " + l.name + ": bad bus index");
    if (static_cast<int>(l.demand.size()) != sys.horizon)
      throw DataError("load " + l.name + ": demand series length " +
                      std::to_string(l.demand.size()) + " != horizon " +
                      std::to_string(sys.horizon));
    for (int t = 0; t < sys.horizon; ++t)
      if (l.demand[t] < 0)
        throw DataError("load " + l.name + ": negative demand in period " +
                        std::to_string(t + 1));
  }
  for (const auto& ln : sys.lines) {
    if (ln.from_bus < 0 || ln.from_bus >= sys.num_buses() || ln.to_bus < 0 ||
        ln.to_bus >= sys.num_buses())
      throw DataError("line " + ln.id + ": bad bus index");
    if (ln.from_bus == ln.to_bus)
      throw DataError("line " + ln.id + ": from and to bus coincide");
    if (ln.capacity <= 0)
      throw DataError("line " + ln.id + ": capacity must be > 0");
    if (ln.reactance <= 0)
      throw DataError("line " + ln.id + ": reactance must be > 0");
  }

  if (sys.num_buses() > 1) {
    std::vector<std::vector<int>> adj(sys.num_buses());
    for (const auto& ln : sys.lines) {
      adj[ln.from_bus].push_back(ln.to_bus);
      adj[ln.to_bus].push_back(ln.from_bus);
    }
    std::vector<char> seen(sys.num_buses(), 0);
    std::queue<int> q;
    q.push(sys.reference_bus);
    seen[sys.reference_bus] = 1;
    int count = 1;
    while (!q.empty()) {
      const int b = q.front();
      q.pop();
      for (int nb : adj[b]) {
        if (!seen[nb]) {
          seen[nb] = 1;
          ++count;
          q.push(nb);
        }
      }
    }
    if (count != sys.num_buses()) {
      for (int b = 0; b < sys.num_buses(); ++b)
        if (!seen[b])
          throw DataError("network is disconnected: bus " +
                          std::to_string(sys.bus_ids[b]) +
                          " is not reachable from the reference bus");
    }
  }
}

SystemData load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open system file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("parse error in '" + path + "': " + e.what());
  }

  SystemData sys;
  try {
    sys.horizon = doc.at("horizon").get<int>();
    for (const auto& b : doc.at("buses")) {
      const int id = b.get<int>();
      if (sys.bus_index.count(id))
        throw DataError("duplicate bus id " + std::to_string(id));
      sys.bus_index[id] = static_cast<int>(sys.bus_ids.size());
      sys.bus_ids.push_back(id);
    }

    if (doc.contains("reference_bus")) {
      if (doc["reference_bus"].is_array())
        throw DataError("exactly one reference bus must be given");
      sys.reference_bus =
          resolve_bus(sys, doc["reference_bus"].get<int>(), "reference_bus");
    } else {
      sys.reference_bus =
          sys.bus_index.count(1) ? sys.bus_index[1] : 0;  // default: bus 1
    }

    for (const auto& g : doc.value("generators", json::array())) {
      Generator gen;
      gen.id = g.at("id").get<std::string>();
      gen.bus = resolve_bus(sys, g.at("bus").get<int>(), "generator " + gen.id);
      gen.no_load_cost = g.value("no_load_cost", 0.0);
      gen.startup_cost = g.value("startup_cost", 0.0);
      gen.shutdown_cost = g.value("shutdown_cost", 0.0);
      gen.marginal_cost = g.at("marginal_cost").get<double>();
      gen.p_min = g.at("p_min").get<double>();
      gen.p_max = g.at("p_max").get<double>();
      gen.ramp_up = g.at("ramp_up").get<double>();
      gen.ramp_down = g.at("ramp_down").get<double>();
      gen.startup_ramp = g.value("startup_ramp", gen.ramp_up);
      gen.shutdown_ramp = g.value("shutdown_ramp", gen.ramp_down);
      gen.min_up = g.value("min_up", 1);
      gen.min_down = g.value("min_down", 1);
      gen.initial_on = g.value("initial_on", false);
      gen.initial_output = g.value("initial_output", 0.0);
      sys.generators.push_back(std::move(gen));
    }

    for (const auto& l : doc.value("lines", json::array())) {
      Line line;
      line.id = l.at("id").get<std::string>();
      line.from_bus =
          resolve_bus(sys, l.at("from_bus").get<int>(), "line " + line.id);
      line.to_bus = resolve_bus(sys, l.at("to_bus").get<int>(), "line " + line.id);
      line.reactance = l.at("reactance").get<double>();
      line.capacity = l.at("capacity").get<double>();
      sys.lines.push_back(std::move(line));
    }

    for (const auto& r : doc.value("reg_units", json::array())) {
      RegUnit reg;
      reg.id = r.at("id").get<std::string>();
      reg.bus = resolve_bus(sys, r.at("bus").get<int>(), "reg unit " + reg.id);
      reg.capacity = r.at("capacity").get<double>();
      reg.curtail_cost = r.value("curtail_cost", 0.0);
      sys.reg_units.push_back(std::move(reg));
    }

    int load_no = 0;
    for (const auto& l : doc.value("loads", json::array())) {
      LoadSeries load;
      ++load_no;
      load.name = l.value("name", "load" + std::to_string(load_no));
      load.bus = resolve_bus(sys, l.at("bus").get<int>(), "load " + load.name);
      load.demand = l.at("demand").get<std::vector<double>>();
      load.sheddable = l.value("sheddable", false);
      load.shed_cost = l.value("shed_cost", 0.0);
      sys.loads.push_back(std::move(load));
    }
  } catch (const json::exception& e) {
    throw DataError("schema error in '" + path + "': " + e.what());
  }

  validate(sys);
  return sys;
}

ForecastSeries load_forecast(const std::string& path,
                             const SystemData& system) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open forecast file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty forecast file");
  const auto header = split_csv_line(line);

  std::vector<int> unit_of_col(header.size(), -1);
  std::vector<char> covered(system.num_reg_units(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (int r = 0; r < system.num_reg_units(); ++r) {
      if (system.reg_units[r].id == header[c]) {
        unit_of_col[c] = r;
        covered[r] = 1;
      }
    }
    if (unit_of_col[c] < 0)
      throw DataError("forecast column '" + header[c] +
                      "' does not match any REG unit id");
  }
  for (int r = 0; r < system.num_reg_units(); ++r)
    if (!covered[r])
      throw DataError("forecast file missing column for REG unit " +
                      system.reg_units[r].id);

  ForecastSeries fc;
  fc.value.assign(system.num_reg_units(),
                  std::vector<double>(system.horizon, 0.0));
  int t = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (t >= system.horizon)
      throw DataError("forecast file has more rows than the horizon");
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("forecast row " + std::to_string(t + 1) +
                      " has wrong column count");
    for (std::size_t c = 0; c < cells.size(); ++c)
      fc.value[unit_of_col[c]][t] = std::stod(cells[c]);
    ++t;
  }
  if (t != system.horizon)
    throw DataError("forecast file has " + std::to_string(t) +
                    " rows, expected " + std::to_string(system.horizon));
  validate_forecast(system, fc);
  return fc;
}

void validate_forecast(const SystemData& system, const ForecastSeries& fc) {
  if (static_cast<int>(fc.value.size()) != system.num_reg_units())
    throw DataError("forecast unit count mismatch");
  for (int r = 0; r < system.num_reg_units(); ++r) {
    if (static_cast<int>(fc.value[r].size()) != system.horizon)
      throw DataError("forecast period count mismatch for unit " +
                      system.reg_units[r].id);
    for (int t = 0; t < system.horizon; ++t) {
      const double v = fc.value[r][t];
      if (v < 0 || v > system.reg_units[r].capacity + 1e-9)
        throw DataError("forecast for unit " + system.reg_units[r].id +
                        " period " + std::to_string(t + 1) +
                        " outside [0, capacity]");
    }
  }
}

UncertaintyBox uncertainty_box(const SystemData& system,
                               const ForecastSeries& forecast) {
  validate_forecast(system, forecast);
  UncertaintyBox box;
  const int R = system.num_reg_units();
  box.lower.assign(R, std::vector<double>(system.horizon, 0.0));
  box.upper.assign(R, std::vector<double>(system.horizon, 0.0));
  for (int r = 0; r < R; ++r) {
    for (int t = 0; t < system.horizon; ++t) {
      box.lower[r][t] = -forecast.value[r][t];
      box.upper[r][t] = system.reg_units[r].capacity - forecast.value[r][t];
    }
  }
  return box;
}

}  // namespace wdruc
