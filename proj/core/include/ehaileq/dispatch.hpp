// Vehicle dispatch: minimum-cost circulation over the closed vehicle OD graph.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ehaileq/kkt.hpp"
#include "ehaileq/lp.hpp"
#include "ehaileq/odgraph.hpp"
#include "ehaileq/scenario.hpp"
#include "ehaileq/tables.hpp"

namespace ehaileq {

struct FareSchedule {
  std::vector<double> base_solo;  // R^e_w
  std::vector<double> base_pool;  // R^p_w
  std::vector<double> solo;       // r^e_w = R^e_w
  std::vector<double> pool;       // r^p_w = gamma R^p_w
  std::vector<double> baseline;   // t-bar_w
  double gamma = 1.0;
};

// R = F + alpha1 (t - t-bar) + alpha2 l per mode; baseline holds t-bar.
FareSchedule compute_fares(const ODHypergraph& hg, const Provider& provider, const TravelTables& tables,
                           const TravelTables& baseline);

struct EdgeCostTable {
  std::vector<double> cost;   // per edge of ODHypergraph::edges(), hours net of fare
  std::vector<double> hours;  // vehicle time on the edge (0 for virtual edges)
};

// Pooling fares are collected on the edge entering the rider's destination.
EdgeCostTable compute_edge_costs(const ODHypergraph& hg, const TravelTables& tables, const FareSchedule& fares);

struct DispatchProblem {
  EdgeCostTable costs;
  std::vector<double> q_solo;
  std::vector<double> q_pool;
  double fleet = std::numeric_limits<double>::infinity();
  std::vector<double> search_cost;  // c^[p](se)_w added to pooling edges leaving origin w
  DestDemandRule dest_rule = DestDemandRule::full;
};

struct DispatchDuals {
  std::vector<double> pool_origin_entry;    // pi^[p]+ at w-bar
  std::vector<double> pool_origin_through;  // pi^[p]- at w-bar
  std::vector<double> pool_dest_through;    // pi^[p]+ at w-underbar
  std::vector<double> pool_dest_exit;       // pi^[p]- at w-underbar
  std::vector<double> solo_origin;          // pi^[e] at w-bar
  std::vector<double> solo_dest;            // pi^[e] at w-underbar
  std::vector<double> virtual_origin;       // pi at w-bar'
  std::vector<double> virtual_dest;         // pi at w-underbar'
  std::vector<double> phi_solo;             // phi^[e]_w
  std::vector<double> phi_pool_origin;      // phi^[p]+_w
  std::vector<double> phi_pool_dest;        // phi^[p]-_w
  double virtual_balance = 0.0;             // lambda
  double lambda_fleet = 0.0;
};

// Row indices of one provider's block inside a LinearProgram.
struct DispatchRows {
  int var_offset = 0;
  std::vector<int> pool_origin_entry, pool_origin_through, pool_dest_through, pool_dest_exit;
  std::vector<int> solo_origin, solo_dest, virtual_origin, virtual_dest;
  std::vector<int> solo_demand, pool_origin_demand, pool_dest_demand;
  int virtual_balance = -1;
  int fleet = -1;
};

// Demand side of the block: fixed right-hand sides, or LP columns (index >= 0)
// that carry the modal demand as a decision variable.
struct DemandTerms {
  std::vector<double> q_solo, q_pool;
  std::vector<int> var_solo, var_pool;
};

// Effective LP cost of every edge: cost plus search friction on pooling
// edges leaving an origin.
std::vector<double> effective_edge_costs(const ODHypergraph& hg, const DispatchProblem& p);

DispatchRows append_dispatch_block(LinearProgram& lp, std::vector<std::string>& var_names, const ODHypergraph& hg,
                                   const std::vector<double>& edge_cost, const std::vector<double>& hours,
                                   double cost_scale, const DemandTerms& demand, double fleet, DestDemandRule rule,
                                   const std::string& prefix);

struct DispatchLp {
  LinearProgram lp;
  DispatchRows rows;
  std::vector<std::string> var_names;
};

DispatchLp build_dispatch_lp(const ODHypergraph& hg, const DispatchProblem& p);

DispatchDuals unpack_dispatch_duals(const DispatchRows& rows, const std::vector<double>& y, double scale = 1.0);
std::vector<double> pack_dispatch_duals(const DispatchRows& rows, const DispatchDuals& d, int num_rows);

struct DispatchSolution {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> z;  // per edge
  DispatchDuals duals;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::string infeasible_family;  // "fleet" or "demand" when infeasible
};

DispatchSolution solve_dispatch(const ODHypergraph& hg, const DispatchProblem& p, bool lexicographic = true);

Residual ncp_residual_dispatch(const ODHypergraph& hg, const DispatchProblem& p, const std::vector<double>& z,
                               const DispatchDuals& duals);

struct SurplusEntry {
  std::string row;  // "solo", "pool_origin", "pool_dest", "fleet"
  int w = -1;
  double supply = 0.0;
  double demand = 0.0;
  double phi = 0.0;
  bool waiting = false;  // supply binds: riders may pay a demand price
};

std::vector<SurplusEntry> surplus_report(const ODHypergraph& hg, const DispatchProblem& p,
                                         const std::vector<double>& z, const DispatchDuals& duals);

// Vehicle-hours used by a flow vector.
double fleet_hours(const EdgeCostTable& costs, const std::vector<double>& z);

}  // namespace ehaileq
