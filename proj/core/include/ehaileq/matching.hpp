// Vehicle-passenger matching: per-pair rider flows on the pooling passenger
// graph, bounded edgewise by the dispatched vehicle flow.
#pragma once

#include <string>
#include <vector>

#include "ehaileq/kkt.hpp"
#include "ehaileq/lp.hpp"
#include "ehaileq/odgraph.hpp"

namespace ehaileq {

struct MatchingProblem {
  std::vector<double> z;          // vehicle flow per edge
  std::vector<double> q_solo;
  std::vector<double> q_pool;
  std::vector<double> edge_time;  // hours per edge (EdgeCostTable::hours)
  std::vector<double> wait_cost;  // c^[p](wt)_w, charged on edges leaving w-bar
};

struct PassengerFlows {
  std::vector<double> solo;               // y^(w)[e] on (w-bar, w-underbar)
  std::vector<std::vector<double>> pool;  // [w][edge], zero off the pair's passenger edges
};

struct MatchDuals {
  std::vector<double> phi_plus;                 // origin demand rows
  std::vector<double> phi_minus;                // destination demand rows
  std::vector<std::vector<double>> pi_origin;   // [w][k] conservation at k-bar
  std::vector<std::vector<double>> pi_dest;     // [w][k] conservation at k-underbar
  std::vector<std::vector<double>> lambda;      // [w][edge] capacity duals, >= 0
  std::vector<double> phi_solo;                 // solo demand rows
  std::vector<double> lambda_solo;              // solo capacity rows
};

struct MatchingLayout {
  std::vector<int> solo_var;
  std::vector<std::vector<int>> pool_var;  // [w][edge] -> column or -1
  std::vector<int> solo_demand, solo_cap;
  std::vector<int> origin_demand, dest_demand;
  std::vector<std::vector<int>> origin_cons, dest_cons;  // [w][k]
  std::vector<std::vector<int>> cap;                     // [w][edge]
};

struct MatchingLp {
  LinearProgram lp;
  MatchingLayout layout;
  std::vector<std::string> var_names;
};

MatchingLp build_matching_lp(const ODHypergraph& hg, const MatchingProblem& p);

struct MatchingSolution {
  LpStatus status = LpStatus::iteration_limit;
  PassengerFlows y;
  MatchDuals duals;
  double objective = 0.0;
  double dual_objective = 0.0;
};

MatchingSolution solve_matching(const ODHypergraph& hg, const MatchingProblem& p, bool lexicographic = true);

std::vector<double> pack_matching_primal(const MatchingLayout& L, const PassengerFlows& y, int num_vars);
std::vector<double> pack_matching_duals(const MatchingLayout& L, const MatchDuals& d, int num_rows);

Residual ncp_residual_matching(const ODHypergraph& hg, const MatchingProblem& p, const PassengerFlows& y,
                               const MatchDuals& duals);

struct PassengerSurplusEntry {
  int w = 0;
  int edge = 0;
  double y = 0.0;
  double z = 0.0;
  double lambda = 0.0;
  bool oversupply = false;
};

std::vector<PassengerSurplusEntry> passenger_surplus(const ODHypergraph& hg, const PassengerFlows& y,
                                                     const std::vector<double>& z, const MatchDuals& duals);

// Largest sum over pairs of y on one edge divided by z there (diagnostic for
// the per-pair capacity bound; 2 means two riders per vehicle).
double max_summed_occupancy(const ODHypergraph& hg, const PassengerFlows& y, const std::vector<double>& z);

}  // namespace ehaileq
