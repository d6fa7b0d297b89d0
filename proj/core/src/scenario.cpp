#include "ehaileq/scenario.hpp"

#include <filesystem>
#include <set>

#include "ehaileq/network.hpp"

namespace ehaileq {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ValidationError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key, "expected a number");
  return v.get<double>();
}

double nonneg(const json& obj, const char* key, const std::string& where, double fallback) {
  double v = number(obj, key, where, fallback);
  if (v < 0) throw ValidationError(where + "." + key, "must be nonnegative");
  return v;
}

PerMode per_mode(const json& obj, const char* key, const std::string& where) {
  PerMode pm;
  if (!obj.contains(key)) return pm;
  const auto& v = obj.at(key);
  const std::string path = where + "." + key;
  if (v.is_number()) {
    pm.solo = pm.pool = v.get<double>();
  } else {
    check_keys(v, path, {"solo", "pool"});
    pm.solo = number(v, "solo", path, 0.0);
    pm.pool = number(v, "pool", path, 0.0);
  }
  if (pm.solo < 0 || pm.pool < 0) throw ValidationError(path, "weights must be nonnegative");
  return pm;
}

ModeFare mode_fare(const json& obj, const std::string& path, int pairs) {
  ModeFare f;
  f.fixed.assign(pairs, 0.0);
  if (obj.is_null()) return f;
  check_keys(obj, path, {"fixed", "alpha1", "alpha2"});
  if (obj.contains("fixed")) {
    const auto& v = obj.at("fixed");
    if (v.is_number()) {
      f.fixed.assign(pairs, v.get<double>());
    } else if (v.is_array()) {
      if (static_cast<int>(v.size()) != pairs)
        throw ValidationError(path + ".fixed", "needs one entry per OD pair");
      for (int i = 0; i < pairs; ++i) {
        if (!v[i].is_number()) throw ValidationError(path + ".fixed", "expected numbers");
        f.fixed[i] = v[i].get<double>();
      }
    } else {
      throw ValidationError(path + ".fixed", "expected a number or an array");
    }
  }
  f.alpha1 = number(obj, "alpha1", path, 0.0);
  f.alpha2 = number(obj, "alpha2", path, 0.0);
  return f;
}

}  // namespace

std::vector<std::pair<int, int>> Scenario::od_list() const {
  std::vector<std::pair<int, int>> od;
  for (const auto& d : demands) od.emplace_back(d.origin, d.destination);
  return od;
}

Scenario load_scenario(const json& cfg) {
  check_keys(cfg, "", {"name", "network", "demands", "providers", "weights", "matching", "solver", "dest_demand",
                       "pool_wait", "description"});
  Scenario s;
  if (cfg.contains("name")) s.name = cfg.at("name").get<std::string>();
  if (cfg.contains("network")) {
    const auto& n = cfg.at("network");
    check_keys(n, "network", {"file", "trips", "capacity_scale"});
    if (n.contains("file")) s.network_file = n.at("file").get<std::string>();
    if (n.contains("trips")) s.trips_file = n.at("trips").get<std::string>();
    s.capacity_scale = number(n, "capacity_scale", "network", 1.0);
    if (!(s.capacity_scale > 0)) throw ValidationError("network.capacity_scale", "must be positive");
  }
  if (!cfg.contains("demands") || !cfg.at("demands").is_array())
    throw ValidationError("demands", "missing demand list");
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < cfg.at("demands").size(); ++i) {
    const auto& d = cfg.at("demands")[i];
    const std::string path = "demands." + std::to_string(i);
    check_keys(d, path, {"origin", "destination", "rate"});
    OdDemand od;
    if (!d.contains("origin") || !d.contains("destination"))
      throw ValidationError(path, "origin and destination are required");
    od.origin = d.at("origin").get<int>();
    od.destination = d.at("destination").get<int>();
    od.rate = number(d, "rate", path, 0.0);
    if (od.rate < 0) throw ValidationError(path + ".rate", "negative demand");
    if (od.origin == od.destination) throw ValidationError(path, "origin equals destination");
    if (!seen.insert({od.origin, od.destination}).second) throw ValidationError(path, "duplicate OD pair");
    s.demands.push_back(od);
  }
  const int W = s.num_pairs();
  if (!cfg.contains("providers") || !cfg.at("providers").is_array() || cfg.at("providers").empty())
    throw ValidationError("providers", "at least one provider is required");
  for (std::size_t i = 0; i < cfg.at("providers").size(); ++i) {
    const auto& p = cfg.at("providers")[i];
    const std::string path = "providers." + std::to_string(i);
    check_keys(p, path, {"name", "fleet", "fleet_unit", "fleet_coefficient", "gamma", "solo", "pool"});
    Provider pr;
    pr.name = p.value("name", "provider" + std::to_string(i + 1));
    if (p.contains("fleet") && !p.at("fleet").is_null()) pr.fleet = nonneg(p, "fleet", path, 0.0);
    if (p.contains("fleet_unit") || p.contains("fleet_coefficient")) {
      if (p.contains("fleet")) throw ValidationError(path + ".fleet", "give either fleet or fleet_unit/coefficient");
      pr.fleet = nonneg(p, "fleet_unit", path, 1.0) * nonneg(p, "fleet_coefficient", path, 1.0);
    }
    pr.gamma = number(p, "gamma", path, 1.0);
    if (!(pr.gamma >= 0.0 && pr.gamma <= 1.0)) throw ValidationError(path + ".gamma", "must lie in [0,1]");
    pr.solo = mode_fare(p.value("solo", json()), path + ".solo", W);
    pr.pool = mode_fare(p.value("pool", json()), path + ".pool", W);
    s.providers.push_back(pr);
  }
  if (cfg.contains("weights")) {
    const auto& w = cfg.at("weights");
    check_keys(w, "weights", {"wt", "surp", "se", "surp_pas", "travel", "in_veh", "inc1", "inc2"});
    s.weights.wt = per_mode(w, "wt", "weights");
    s.weights.surp = per_mode(w, "surp", "weights");
    s.weights.se = per_mode(w, "se", "weights");
    s.weights.surp_pas = per_mode(w, "surp_pas", "weights");
    s.weights.travel = per_mode(w, "travel", "weights");
    s.weights.in_veh = nonneg(w, "in_veh", "weights", 0.0);
    s.weights.inc1 = nonneg(w, "inc1", "weights", 0.0);
    s.weights.inc2 = nonneg(w, "inc2", "weights", 0.0);
  }
  if (cfg.contains("matching")) {
    const auto& m = cfg.at("matching");
    check_keys(m, "matching", {"A", "alpha1", "alpha2", "epsilon"});
    s.matching.A = number(m, "A", "matching", 0.2);
    s.matching.alpha1 = number(m, "alpha1", "matching", 1.0);
    s.matching.alpha2 = number(m, "alpha2", "matching", 1.0);
    s.matching.epsilon = number(m, "epsilon", "matching", 1e-6);
    if (!(s.matching.A > 0)) throw ValidationError("matching.A", "must be positive");
    if (!(s.matching.alpha2 > 0)) throw ValidationError("matching.alpha2", "must be positive");
    if (!(s.matching.epsilon > 0)) throw ValidationError("matching.epsilon", "must be positive");
  }
  if (cfg.contains("solver")) {
    const auto& v = cfg.at("solver");
    check_keys(v, "solver",
               {"tol", "max_iter", "damping", "damping_factor", "ue_gap", "ue_max_iter", "lexicographic", "seed"});
    s.solver.tol = number(v, "tol", "solver", s.solver.tol);
    if (!(s.solver.tol > 0)) throw ValidationError("solver.tol", "must be positive");
    s.solver.max_iter = static_cast<int>(number(v, "max_iter", "solver", s.solver.max_iter));
    if (s.solver.max_iter < 1) throw ValidationError("solver.max_iter", "must be at least 1");
    if (v.contains("damping")) {
      auto d = v.at("damping").get<std::string>();
      if (d == "msa") s.solver.damping = Damping::msa;
      else if (d == "fixed") s.solver.damping = Damping::fixed;
      else throw ValidationError("solver.damping", "expected msa or fixed");
    }
    s.solver.damping_factor = number(v, "damping_factor", "solver", s.solver.damping_factor);
    if (!(s.solver.damping_factor > 0 && s.solver.damping_factor <= 1))
      throw ValidationError("solver.damping_factor", "must lie in (0,1]");
    s.solver.ue_gap = number(v, "ue_gap", "solver", s.solver.ue_gap);
    s.solver.ue_max_iter = static_cast<int>(number(v, "ue_max_iter", "solver", s.solver.ue_max_iter));
    if (v.contains("lexicographic")) s.solver.lexicographic = v.at("lexicographic").get<bool>();
    if (v.contains("seed")) s.solver.seed = v.at("seed").get<std::uint64_t>();
  }
  if (cfg.contains("dest_demand")) {
    auto d = cfg.at("dest_demand").get<std::string>();
    if (d == "full") s.dest_demand = DestDemandRule::full;
    else if (d == "half") s.dest_demand = DestDemandRule::half;
    else throw ValidationError("dest_demand", "expected full or half");
  }
  if (cfg.contains("pool_wait")) {
    auto d = cfg.at("pool_wait").get<std::string>();
    if (d == "literal") s.pool_wait = PoolWaitRule::literal;
    else if (d == "normalized") s.pool_wait = PoolWaitRule::normalized;
    else throw ValidationError("pool_wait", "expected literal or normalized");
  }
  return s;
}

Scenario load_scenario(const std::string& text) {
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", e.what());
  }
  return load_scenario(cfg);
}

json read_config_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config", e.what());
  }
}

Scenario load_scenario_json_at(const json& cfg, const std::string& base_dir) {
  Scenario s = load_scenario(cfg);
  namespace fs = std::filesystem;
  auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (fs::path(base_dir) / p).lexically_normal().string();
  };
  resolve(s.network_file);
  resolve(s.trips_file);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  return load_scenario_json_at(read_config_file(path), std::filesystem::path(path).parent_path().string());
}

void set_config_value(json& cfg, const std::string& path, const json& value) {
  json* cur = &cfg;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const bool last = dot == std::string::npos;
    if (cur->is_array()) {
      std::size_t idx = std::stoul(key);
      if (idx >= cur->size()) throw ValidationError(path, "index out of range");
      cur = &(*cur)[idx];
    } else {
      cur = &(*cur)[key];
    }
    if (last) break;
    start = dot + 1;
  }
  *cur = value;
}

}  // namespace ehaileq
