#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "wdruc/solver.hpp"

namespace wdruc {

namespace {

using nlohmann::json;

constexpr double kJsonInf = 1e30;  // sentinel shared with the worker

std::string worker_script_path() {
  if (const char* env = std::getenv("WDRUC_SOLVER_WORKER")) return env;
#ifdef WDRUC_WORKER_PATH
  if (std::filesystem::exists(WDRUC_WORKER_PATH)) return WDRUC_WORKER_PATH;
#endif
  return {};
}

double clamp_inf(double v) {
  if (v >= kJsonInf) return kJsonInf;
  if (v <= -kJsonInf) return -kJsonInf;
  return v;
}

/// Owns a long-lived python worker; requests and responses are
/// newline-delimited JSON over pipes.
class ScipyWorker {
 public:
  ~ScipyWorker() { shutdown(); }

  bool start() {
    const std::string script = worker_script_path();
    if (script.empty()) return false;
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0) return false;
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      return false;
    }
    pid_ = fork();
    if (pid_ < 0) return false;
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execlp("python3", "python3", script.c_str(), nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    // Handshake so import errors surface immediately.
    std::string reply;
    if (!roundtrip("{\"cmd\":\"ping\"}", reply)) {
      shutdown();
      return false;
    }
    return reply.find("\"ok\"") != std::string::npos;
  }

  bool alive() const { return pid_ > 0; }

  bool roundtrip(const std::string& request, std::string& response) {
    if (!alive()) return false;
    std::string line = request;
    line.push_back('\n');
    std::size_t off = 0;
    while (off < line.size()) {
      ssize_t w = write(in_fd_, line.data() + off, line.size() - off);
      if (w <= 0) return false;
      off += static_cast<std::size_t>(w);
    }
    response.clear();
    char buf[1 << 16];
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        response = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return true;
      }
      ssize_t r = read(out_fd_, buf, sizeof(buf));
      if (r <= 0) return false;
      buffer_.append(buf, static_cast<std::size_t>(r));
    }
  }

  void shutdown() {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ > 0) {
      int st = 0;
      waitpid(pid_, &st, 0);
      pid_ = -1;
    }
  }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
};

std::mutex g_worker_mutex;
std::unique_ptr<ScipyWorker> g_worker;
bool g_worker_failed = false;

ScipyWorker* acquire_worker() {
  if (g_worker && g_worker->alive()) return g_worker.get();
  if (g_worker_failed) return nullptr;
  g_worker = std::make_unique<ScipyWorker>();
  if (!g_worker->start()) {
    g_worker.reset();
    g_worker_failed = true;
    return nullptr;
  }
  return g_worker.get();
}

json encode_model(const Model& model, const SolveParams& params) {
  const int n = model.num_variables();
  const int m = model.num_constraints();
  const double sign = model.sense() == Sense::minimize ? 1.0 : -1.0;
  json req;
  auto& obj = req["obj"] = json::array();
  auto& lb = req["lb"] = json::array();
  auto& ub = req["ub"] = json::array();
  auto& ints = req["int"] = json::array();
  for (int j = 0; j < n; ++j) {
    const auto& v = model.variable(j);
    obj.push_back(sign * v.obj);
    lb.push_back(clamp_inf(v.lower));
    ub.push_back(clamp_inf(v.upper));
    if (v.integral) ints.push_back(j);
  }
  std::string rel;
  rel.reserve(m);
  auto& rhs = req["rhs"] = json::array();
  json start = json::array(), idx = json::array(), val = json::array();
  start.push_back(0);
  long nnz = 0;
  for (int i = 0; i < m; ++i) {
    const auto& row = model.constraint(i);
    for (const auto& [var, coeff] : row.terms) {
      idx.push_back(var);
      val.push_back(coeff);
      ++nnz;
    }
    start.push_back(nnz);
    rel.push_back(static_cast<char>(row.rel));
    rhs.push_back(row.rhs);
  }
  req["rel"] = rel;
  req["rows"] = {{"start", std::move(start)},
                 {"idx", std::move(idx)},
                 {"val", std::move(val)}};
  req["mip_gap"] = params.mip_gap;
  if (params.time_limit) req["time_limit"] = *params.time_limit;
  return req;
}

}  // namespace

bool scipy_backend_available() {
  std::lock_guard<std::mutex> lock(g_worker_mutex);
  return acquire_worker() != nullptr;
}

Solution solve_scipy(const Model& model, const SolveParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const json req = encode_model(model, params);
  std::string reply;
  {
    std::lock_guard<std::mutex> lock(g_worker_mutex);
    ScipyWorker* worker = acquire_worker();
    if (!worker)
      throw SolverError("scipy backend unavailable (worker failed to start)");
    if (!worker->roundtrip(req.dump(), reply)) {
      // One restart attempt; a crashed HiGHS run should not poison the run.
      g_worker.reset();
      worker = acquire_worker();
      if (!worker || !worker->roundtrip(req.dump(), reply))
        throw SolverError("scipy worker died during solve");
    }
  }
  json resp = json::parse(reply);
  const std::string status = resp.value("status", "error");
  if (status == "error")
    throw SolverError("scipy backend: " + resp.value("message", "unknown"));

  Solution sol;
  sol.rows = model.num_constraints();
  sol.cols = model.num_variables();
  if (status == "optimal")
    sol.status = SolveStatus::optimal;
  else if (status == "infeasible")
    sol.status = SolveStatus::infeasible;
  else if (status == "unbounded")
    sol.status = SolveStatus::unbounded;
  else
    sol.status = SolveStatus::limit;

  const double sign = model.sense() == Sense::minimize ? 1.0 : -1.0;
  if (resp.contains("x")) {
    sol.values = resp["x"].get<std::vector<double>>();
    sol.objective = sign * resp.value("obj", 0.0) + model.objective_offset();
  }
  if (resp.contains("dual")) {
    sol.row_duals = resp["dual"].get<std::vector<double>>();
    for (double& d : sol.row_duals) d *= sign;
  }
  sol.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return sol;
}

}  // namespace wdruc
