// Scenario configuration: demands, providers, fares, weights, solver knobs.
#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ehaileq {

struct ValidationError : std::runtime_error {
  ValidationError(const std::string& key, const std::string& msg)
      : std::runtime_error(key + ": " + msg), key(key) {}
  std::string key;
};

enum class Mode { solo = 0, pool = 1 };
inline const char* to_string(Mode m) { return m == Mode::solo ? "solo" : "pool"; }

struct PerMode {
  double solo = 0.0;
  double pool = 0.0;
  double operator[](Mode m) const { return m == Mode::solo ? solo : pool; }
};

struct ModeFare {
  std::vector<double> fixed;  // one entry per OD pair
  double alpha1 = 0.0;        // per hour above the baseline time
  double alpha2 = 0.0;        // per mile
};

struct Provider {
  std::string name;
  double fleet = std::numeric_limits<double>::infinity();  // vehicle-hours per hour
  double gamma = 1.0;
  ModeFare solo;
  ModeFare pool;
  const ModeFare& fare(Mode m) const { return m == Mode::solo ? solo : pool; }
  bool has_fleet_limit() const { return fleet < std::numeric_limits<double>::infinity(); }
};

struct Weights {
  PerMode wt;        // waiting for pickup
  PerMode surp;      // demand-price (surplus) weight
  PerMode se;        // search friction
  PerMode surp_pas;  // passenger-side capacity surplus
  PerMode travel;    // accepted for completeness; no term in the disutility uses it
  double in_veh = 0.0;
  double inc1 = 0.0;
  double inc2 = 0.0;
};

struct MatchingConstants {
  double A = 0.2;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double epsilon = 1e-6;  // floor on q*phi inside the friction term
};

enum class DestDemandRule { full, half };
enum class PoolWaitRule { literal, normalized };
enum class Damping { msa, fixed };

struct SolverSettings {
  double tol = 1e-7;
  int max_iter = 200;
  Damping damping = Damping::msa;
  double damping_factor = 0.5;
  double ue_gap = 1e-13;  // path-cost spread, relative
  int ue_max_iter = 5000;
  bool lexicographic = true;
  std::uint64_t seed = 0;
};

struct OdDemand {
  int origin = 0;  // external road node ids
  int destination = 0;
  double rate = 0.0;
};

struct Scenario {
  std::string name;
  std::string network_file;  // resolved relative to the config file when loaded from disk
  std::string trips_file;
  double capacity_scale = 1.0;
  std::vector<OdDemand> demands;
  std::vector<Provider> providers;
  Weights weights;
  MatchingConstants matching;
  SolverSettings solver;
  DestDemandRule dest_demand = DestDemandRule::full;
  PoolWaitRule pool_wait = PoolWaitRule::literal;

  int num_pairs() const { return static_cast<int>(demands.size()); }
  int num_providers() const { return static_cast<int>(providers.size()); }
  std::vector<std::pair<int, int>> od_list() const;
};

Scenario load_scenario(const std::string& config_text);
Scenario load_scenario(const nlohmann::json& config);
// Reads a config file and resolves network/trips paths against its directory.
Scenario load_scenario_file(const std::string& path);
nlohmann::json read_config_file(const std::string& path);
Scenario load_scenario_json_at(const nlohmann::json& config, const std::string& base_dir);

// Sets a dotted path such as "providers.0.gamma" inside a config.
void set_config_value(nlohmann::json& config, const std::string& path, const nlohmann::json& value);

}  // namespace ehaileq
