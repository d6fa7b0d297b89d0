// ehaileq: solve, sweep, validate, graph and oracle subcommands.
//
// Exit codes
//   0  success (solve converged, oracle matched)
//   1  input error, or oracle instance too large
//   2  solve stopped without convergence (partial state is still written)
//   3  oracle mismatch
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ehaileq/equilibrium.hpp"
#include "ehaileq/oracle.hpp"
#include "ehaileq/report.hpp"
#include "ehaileq/sweeps.hpp"

namespace fs = std::filesystem;
using namespace ehaileq;

namespace {

struct Common {
  std::string scenario;
  std::string network;
  std::string trips;
  std::string out = ".";
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  bool strict_config = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--network", c.network, "TNTP network file (overrides the scenario)")->check(CLI::ExistingFile);
  cmd->add_option("--trips", c.trips, "TNTP trips file (overrides the scenario)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--tol", c.tol, "residual tolerance");
  cmd->add_option("--max-iter", c.max_iter, "outer iteration cap");
  cmd->add_option("--seed", c.seed, "tie-break seed");
  cmd->add_flag("--strict-config", c.strict_config, "values in the scenario file win over flags");
}

bool config_has(const nlohmann::json& cfg, const char* key) {
  return cfg.contains("solver") && cfg.at("solver").contains(key);
}

// Flag overrides land in the config so that sweeps see them per point too.
nlohmann::json prepared_config(const Common& c) {
  nlohmann::json cfg = read_config_file(c.scenario);
  const fs::path here = fs::current_path();
  auto put = [&](const char* key, const nlohmann::json& v) {
    if (c.strict_config && config_has(cfg, key)) return;
    cfg["solver"][key] = v;
  };
  if (c.tol) put("tol", *c.tol);
  if (c.max_iter) put("max_iter", *c.max_iter);
  if (c.seed) put("seed", *c.seed);
  if (!c.network.empty()) cfg["network"]["file"] = fs::absolute(here / c.network).string();
  if (!c.trips.empty()) cfg["network"]["trips"] = fs::absolute(here / c.trips).string();
  return cfg;
}

std::string base_dir(const Common& c) { return fs::absolute(c.scenario).parent_path().string(); }

Instance load_instance(const Common& c) {
  Scenario sc = load_scenario_json_at(prepared_config(c), base_dir(c));
  spdlog::debug("scenario '{}': {} pairs, {} providers", sc.name, sc.num_pairs(), sc.num_providers());
  return make_instance(sc);
}

void ensure_dir(const std::string& d) { fs::create_directories(d); }

int cmd_solve(const Common& c) {
  Instance inst = load_instance(c);
  SolverConfig cfg = solver_config(inst.scenario);
  EquilibriumState s = solve_equilibrium(inst, cfg);
  ensure_dir(c.out);
  const fs::path out(c.out);
  write_text((out / "state.json").string(), state_to_json(inst, s).dump(2) + "\n");
  write_text((out / "trace.csv").string(), trace_csv(s));
  write_text((out / "residual.txt").string(), residual_report(inst, s));
  if (s.feasible) {
    write_text((out / "metrics.csv").string(), metrics_csv(inst, s));
    write_text((out / "utilities.csv").string(), utilities_csv(inst, s));
  }
  std::cout << "status: " << s.status << "\n"
            << "iterations: " << s.iterations << "\n"
            << "residual: " << format_number(s.residual.value) << " (" << s.residual.where << ")\n";
  return s.converged ? 0 : 2;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& grid, int jobs) {
  SweepSpec spec;
  spec.base = prepared_config(c);
  spec.base_dir = base_dir(c);
  spec.param = param;
  spec.grid = parse_grid(grid);
  spec.jobs = jobs;
  load_scenario_json_at(spec.base, spec.base_dir);  // fail early on a bad base config
  SweepResult r = run_sweep(spec);
  ensure_dir(c.out);
  const fs::path out(c.out);
  write_text((out / "sweep_demand.csv").string(), sweep_demand_csv(r));
  write_text((out / "sweep_utility.csv").string(), sweep_utility_csv(r));
  write_text((out / "sweep_metrics.csv").string(), sweep_metrics_csv(r));
  write_text((out / "sweep_times.csv").string(), sweep_times_csv(r));
  write_text((out / "sweep_thresholds.csv").string(), sweep_thresholds_csv(r));
  int unconverged = 0;
  for (const auto& p : r.points) {
    if (!p.error.empty()) spdlog::warn("{} = {}: {}", param, p.value, p.error);
    if (!p.error.empty() || !p.state.converged) ++unconverged;
  }
  std::cout << r.points.size() << " points, " << unconverged << " not converged\n";
  return 0;
}

int cmd_validate(const Common& c) {
  Instance inst = load_instance(c);
  std::cout << "scenario: " << inst.scenario.name << "\n"
            << "road nodes: " << inst.network.num_nodes() << ", links: " << inst.network.links.size() << "\n"
            << "od pairs: " << inst.scenario.num_pairs() << ", providers: " << inst.scenario.num_providers() << "\n"
            << "hypergraph arcs: " << inst.graph.full_arc_count() << "\n"
            << "ok\n";
  return 0;
}

int cmd_graph(const Common& c) {
  Instance inst = load_instance(c);
  ensure_dir(c.out);
  write_text((fs::path(c.out) / "graph.json").string(), graph_to_json(inst).dump(2) + "\n");
  std::cout << "arcs: " << inst.graph.full_arc_count() << "\n";
  return 0;
}

int cmd_oracle(const Common& c, const OracleOptions& opt) {
  Instance inst = load_instance(c);
  OracleReport rep;
  try {
    rep = run_oracle(inst, opt);
  } catch (const OracleTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& ch : rep.checks) std::cout << ch.name << " " << format_number(ch.value) << "\n";
  std::cout << "max diff: " << format_number(rep.max_diff) << (rep.passed() ? " ok" : " MISMATCH") << "\n";
  return rep.passed() ? 0 : 3;
}

void set_log_level() {
  const char* env = std::getenv("EHAILEQ_LOG");
  spdlog::set_level(spdlog::level::warn);
  if (env) spdlog::set_level(spdlog::level::from_str(env));
  spdlog::set_pattern("[%l] %v");
}

}  // namespace

int main(int argc, char** argv) {
  set_log_level();
  CLI::App app{"Equilibrium of e-hailing mode choice, dispatch and congestion"};
  app.require_subcommand(1);

  Common solve_c, sweep_c, validate_c, graph_c, oracle_c;
  auto* solve = app.add_subcommand("solve", "solve one scenario");
  add_common(solve, solve_c);

  auto* sweep = app.add_subcommand("sweep", "solve a scenario over a parameter grid");
  add_common(sweep, sweep_c);
  std::string param = "providers.0.gamma", grid = "0:0.05:1";
  int jobs = 0;
  sweep->add_option("--param", param, "dotted config path")->capture_default_str();
  sweep->add_option("--grid", grid, "start:step:stop or comma list")->capture_default_str();
  sweep->add_option("--jobs", jobs, "parallel points, 0 for all cores");

  auto* validate = app.add_subcommand("validate", "check inputs without solving");
  add_common(validate, validate_c);

  auto* graph = app.add_subcommand("graph", "write the OD hypergraph as JSON");
  add_common(graph, graph_c);

  auto* oracle = app.add_subcommand("oracle", "cross-check dispatch and matching against rebuilt LPs");
  add_common(oracle, oracle_c);
  OracleOptions oopt;
  oracle->add_option("--provider", oopt.provider, "provider index");
  oracle->add_option("--pool-share", oopt.pool_share)->group("");
  oracle->add_option("--perturb-cost", oopt.perturb_cost)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(solve_c);
    if (*sweep) return cmd_sweep(sweep_c, param, grid, jobs);
    if (*validate) return cmd_validate(validate_c);
    if (*graph) return cmd_graph(graph_c);
    if (*oracle) return cmd_oracle(oracle_c, oopt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
