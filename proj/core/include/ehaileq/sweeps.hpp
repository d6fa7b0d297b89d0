// Parameter sweeps over a scenario config and threshold detection on the
// resulting mode shares.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehaileq/equilibrium.hpp"

namespace ehaileq {

struct SweepSpec {
  nlohmann::json base;     // scenario config
  std::string base_dir;    // resolves relative network paths
  std::string param;       // dotted path, e.g. "providers.0.gamma"
  std::vector<double> grid;
  int jobs = 0;            // 0: hardware concurrency
  std::optional<double> tol;
  std::optional<int> max_iter;
};

struct SweepPoint {
  double value = 0.0;
  std::string error;  // set when the point could not be built or solved
  EquilibriumState state;
  std::vector<Metrics> metrics;
  std::vector<ProviderDerived> derived;
  std::vector<double> demand;     // q_w
  std::vector<double> od_time;    // equilibrium t(o_w, d_w)
  std::vector<double> free_time;  // free-flow t(o_w, d_w)
};

struct SweepResult {
  std::string param;
  std::vector<std::pair<int, int>> pairs;  // external node ids
  std::vector<std::string> providers;
  std::vector<SweepPoint> points;  // in grid order
};

// "a:step:b" (inclusive) or a comma list. Throws ValidationError unless
// nonempty and strictly monotone.
std::vector<double> parse_grid(const std::string& text);
void check_grid(const std::vector<double>& grid);

SweepResult run_sweep(const SweepSpec& spec);

// Solves one grid point; used by run_sweep.
SweepPoint solve_point(const SweepSpec& spec, double value);

// Demand of one mode on pair w, summed over providers when provider < 0.
double mode_demand(const SweepPoint& p, int w, Mode mode, int provider = -1);

struct Threshold {
  bool found = false;
  double value = 0.0;
  double half_width = 0.0;  // grid-resolution uncertainty
  std::string text() const;  // value, or "none"
};

// First grid cell where the mode's share of q_w leaves 0 or leaves q_w.
Threshold threshold_detect(const SweepResult& r, int w, Mode mode, int provider = -1, double tol = 1e-6);

}  // namespace ehaileq
