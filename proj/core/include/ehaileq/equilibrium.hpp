// Coupled equilibrium of mode choice, dispatch, matching and route choice,
// solved by damped block Gauss-Seidel and certified by the unified residual.
#pragma once

#include <string>
#include <vector>

#include "ehaileq/assignment.hpp"
#include "ehaileq/dispatch.hpp"
#include "ehaileq/kkt.hpp"
#include "ehaileq/matching.hpp"
#include "ehaileq/modechoice.hpp"
#include "ehaileq/network.hpp"
#include "ehaileq/odgraph.hpp"
#include "ehaileq/scenario.hpp"
#include "ehaileq/tables.hpp"

namespace ehaileq {

// Everything a solve needs that does not change between iterations.
struct Instance {
  Scenario scenario;
  RoadNetwork network;  // capacities already scaled
  ODHypergraph graph;
  TravelTables baseline;  // free-flow OD times, the fare baseline t-bar
};

// Loads network files named by the scenario (paths already resolved).
Instance make_instance(const Scenario& sc);
Instance make_instance(const Scenario& sc, RoadNetwork net);

struct SolverConfig {
  double tol = 1e-7;
  int max_iter = 200;
  Damping damping = Damping::msa;
  double damping_factor = 0.5;
  UeOptions ue;
  bool lexicographic = true;
  std::uint64_t seed = 0;
  int max_backtracks = 30;  // step halvings when a damped point makes clearing infeasible
};

SolverConfig solver_config(const Scenario& sc);

struct ProviderState {
  std::vector<double> q_solo, q_pool;  // per pair
  std::vector<double> z;               // per edge
  DispatchDuals duals;                 // in hours
  LpStatus matching_status = LpStatus::optimal;
  PassengerFlows y;
  MatchDuals match_duals;
};

// Quantities recomputed from a state: the inputs of every residual row.
struct ProviderDerived {
  FareSchedule fares;
  WaitFractions fractions;
  std::vector<double> wait_solo, wait_pool;
  std::vector<Friction> friction_solo, friction_pool;
  std::vector<double> surp_pas_solo, surp_pas_pool;
  std::vector<UtilityItems> u_solo, u_pool;
  EdgeCostTable costs;
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;
  std::string where;
  double step = 1.0;
  bool support_changed = false;
  int backtracks = 0;
};

struct EquilibriumState {
  bool feasible = false;
  bool converged = false;
  std::string status;  // "converged", "iteration limit", "infeasible: fleet", ...
  int iterations = 0;
  std::vector<ProviderState> providers;
  std::vector<double> mu;  // per pair, from the clearing LP
  AugmentedDemand demand;
  LinkState links;
  TravelTables tables;  // OD times at links.x
  Residual residual;
  std::vector<IterationRecord> trace;
};

EquilibriumState solve_equilibrium(const Instance& inst, const SolverConfig& cfg);

// Derived quantities for provider n from the state under tables t.
ProviderDerived derive_provider(const Instance& inst, const TravelTables& t, int n, const ProviderState& ps);

struct ResidualBreakdown {
  Residual total;
  Residual dispatch, matching, assignment, choice, fractions;
};

ResidualBreakdown residual_breakdown(const Instance& inst, const EquilibriumState& s);
Residual unified_residual(const Instance& inst, const EquilibriumState& s);

struct Metrics {
  double dhm = 0.0;  // vehicle-miles of rebalancing legs
  double stc = 0.0;  // passenger-hours
  double tvh = 0.0;  // vehicle-hours, occupied and rebalancing
};

// Per provider, then the sum as the last entry.
std::vector<Metrics> compute_metrics(const Instance& inst, const EquilibriumState& s);

}  // namespace ehaileq
