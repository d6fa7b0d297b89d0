// Congested route choice of all e-hailing vehicle movements: link-node user
// equilibrium on the road network with BPR link costs.
#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ehaileq/kkt.hpp"
#include "ehaileq/network.hpp"
#include "ehaileq/odgraph.hpp"
#include "ehaileq/tables.hpp"

namespace ehaileq {

// Vehicle demand between road nodes (i,d), keyed by node indices.
struct AugmentedDemand {
  std::map<std::pair<int, int>, double> q;
  double total() const;
};

// Sums e-solo demand, pooling legs (OO, OD, DD) and rebalancing legs over
// providers. z holds one flow vector per provider; q_solo one vector per provider.
AugmentedDemand assemble_demand(const ODHypergraph& hg, const std::vector<std::vector<double>>& q_solo,
                                const std::vector<std::vector<double>>& z);

enum class UeMethod { path_equilibration, frank_wolfe };

struct UeOptions {
  UeMethod method = UeMethod::path_equilibration;
  double gap = 1e-13;   // path method: relative spread of used path costs; FW: relative gap
  int max_iter = 5000;
};

struct PathFlow {
  std::vector<int> links;
  double flow = 0.0;
};

struct LinkState {
  std::vector<double> x;                // aggregate link flow
  std::vector<double> t;                // link time at x
  std::vector<int> destinations;        // node indices with positive inbound demand
  std::vector<std::vector<double>> xd;  // per destination, per link
  std::vector<std::vector<double>> tau; // per destination, per node: min time to destination
  std::map<std::pair<int, int>, std::vector<PathFlow>> paths;  // empty for Frank-Wolfe
  double relative_gap = 0.0;
  int iterations = 0;
  std::vector<double> beckmann_trace;   // Frank-Wolfe objective per iteration
};

// Throws std::runtime_error naming the pair when an OD with demand is disconnected.
LinkState solve_ue(const RoadNetwork& net, const AugmentedDemand& demand, const UeOptions& opt = {});

// Shortest times from every node to `target` under link times t.
std::vector<double> times_to(const RoadNetwork& net, const std::vector<double>& link_cost, int target);

double beckmann(const RoadNetwork& net, const std::vector<double>& x);

// t_uv = tau^v_u and shortest static distances for all pairs among the
// hypergraph's road nodes.
TravelTables od_times_and_distances(const RoadNetwork& net, const std::vector<double>& link_time,
                                    const ODHypergraph& hg);

// Free-flow version of the above.
TravelTables free_flow_tables(const RoadNetwork& net, const ODHypergraph& hg);

// Wardrop complementarity and conservation rows, with tau recomputed from x.
Residual ncp_residual_assignment(const RoadNetwork& net, const AugmentedDemand& demand, const LinkState& s);

// Relative gap (sum t x - sum q tau) / sum t x at flows x.
double relative_gap(const RoadNetwork& net, const AugmentedDemand& demand, const std::vector<double>& x);

}  // namespace ehaileq
