#include "ehaileq/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace ehaileq {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> g;
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("grid", "not a number: '" + s + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ValidationError("grid", "expected start:step:stop");
    const double a = num(parts[0]), step = num(parts[1]), b = num(parts[2]);
    if (!(step > 0)) throw ValidationError("grid", "step must be positive");
    const long n = std::lround(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(std::round((a + i * step) * 1e12) / 1e12);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) g.push_back(num(p));
  }
  check_grid(g);
  return g;
}

void check_grid(const std::vector<double>& g) {
  if (g.empty()) throw ValidationError("grid", "empty grid");
  bool up = true, down = true;
  for (std::size_t i = 1; i < g.size(); ++i) {
    up = up && g[i] > g[i - 1];
    down = down && g[i] < g[i - 1];
  }
  if (!up && !down) throw ValidationError("grid", "grid must be strictly monotone");
}

SweepPoint solve_point(const SweepSpec& spec, double value) {
  SweepPoint p;
  p.value = value;
  try {
    nlohmann::json cfg = spec.base;
    set_config_value(cfg, spec.param, value);
    Scenario sc = load_scenario_json_at(cfg, spec.base_dir);
    Instance inst = make_instance(sc);
    SolverConfig sol = solver_config(sc);
    if (spec.tol) sol.tol = *spec.tol;
    if (spec.max_iter) sol.max_iter = *spec.max_iter;
    p.state = solve_equilibrium(inst, sol);
    for (const auto& d : sc.demands) p.demand.push_back(d.rate);
    for (const auto& pr : inst.graph.pairs()) p.free_time.push_back(inst.baseline.t(pr.origin, pr.destination));
    if (p.state.feasible) {
      p.metrics = compute_metrics(inst, p.state);
      for (int n = 0; n < sc.num_providers(); ++n)
        p.derived.push_back(derive_provider(inst, p.state.tables, n, p.state.providers[n]));
      for (const auto& pr : inst.graph.pairs()) p.od_time.push_back(p.state.tables.t(pr.origin, pr.destination));
    }
  } catch (const std::exception& e) {
    p.error = e.what();
  }
  return p;
}

SweepResult run_sweep(const SweepSpec& spec) {
  check_grid(spec.grid);
  Scenario sc = load_scenario_json_at(spec.base, spec.base_dir);
  SweepResult r;
  r.param = spec.param;
  for (const auto& d : sc.demands) r.pairs.push_back({d.origin, d.destination});
  for (const auto& p : sc.providers) r.providers.push_back(p.name);
  r.points.resize(spec.grid.size());
  unsigned jobs = spec.jobs > 0 ? static_cast<unsigned>(spec.jobs) : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(spec.grid.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.grid.size(); i = next++) r.points[i] = solve_point(spec, spec.grid[i]);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return r;
}

double mode_demand(const SweepPoint& p, int w, Mode mode, int provider) {
  double s = 0.0;
  for (std::size_t n = 0; n < p.state.providers.size(); ++n) {
    if (provider >= 0 && static_cast<int>(n) != provider) continue;
    const auto& ps = p.state.providers[n];
    s += mode == Mode::solo ? ps.q_solo[w] : ps.q_pool[w];
  }
  return s;
}

std::string Threshold::text() const {
  if (!found) return "none";
  std::ostringstream os;
  os << value << " +/- " << half_width;
  return os.str();
}

Threshold threshold_detect(const SweepResult& r, int w, Mode mode, int provider, double tol) {
  Threshold t;
  auto state = [&](const SweepPoint& p) {
    if (!p.error.empty() || !p.state.feasible) return -1;
    const double q = p.demand[w];
    const double share = q > 0 ? mode_demand(p, w, mode, provider) / q : 0.0;
    if (share <= tol) return 0;
    if (share >= 1.0 - tol) return 2;
    return 1;
  };
  for (std::size_t i = 0; i + 1 < r.points.size(); ++i) {
    const int a = state(r.points[i]), b = state(r.points[i + 1]);
    if (a < 0 || b < 0 || a == b) continue;
    const bool leaves_full = a == 2 || b == 2, leaves_zero = a == 0 || b == 0;
    if (!leaves_full && !leaves_zero) continue;
    t.found = true;
    t.value = 0.5 * (r.points[i].value + r.points[i + 1].value);
    t.half_width = 0.5 * std::abs(r.points[i + 1].value - r.points[i].value);
    return t;
  }
  return t;
}

}  // namespace ehaileq
