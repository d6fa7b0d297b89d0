// Rider mode choice: waiting-cost fractions, search friction, itemized modal
// disutilities and the market-clearing split of each OD demand.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ehaileq/dispatch.hpp"
#include "ehaileq/kkt.hpp"
#include "ehaileq/lp.hpp"
#include "ehaileq/matching.hpp"
#include "ehaileq/odgraph.hpp"
#include "ehaileq/scenario.hpp"
#include "ehaileq/tables.hpp"

namespace ehaileq {

// Shares of vehicle inflow into each origin, from the box QP
//   min sum_v (Z/2 o_v^2 - z_v o_v),  0 <= o_v <= 1,  Z = sum_v z_v
// which has o_v = z_v / Z for Z > 0 and o = 0 when nothing flows in.
struct WaitFractions {
  std::vector<std::vector<double>> o;         // [v][w] rebalancing v-underbar' -> w-bar'
  std::vector<std::vector<double>> eta;       // [v][w]
  std::vector<std::vector<double>> o_pool;    // [k][w] pooled pickup k-bar -> w-bar, k != w
  std::vector<std::vector<double>> eta_pool;  // [k][w]
};

WaitFractions solve_wait_fractions(const ODHypergraph& hg, const std::vector<double>& z);

// min(o, Z o - z + eta) and min(eta, 1 - o) over every row.
Residual wait_fraction_residual(const ODHypergraph& hg, const std::vector<double>& z, const WaitFractions& f);

// Hours: e-solo beta * sum_v o_vw t(d_v, o_w); e-pooling adds, for every other
// origin k, sum_v o_vk t(d_v, o_k) + o^[p]_kw t(o_k, o_w). The normalized rule
// weights each k term by o^[p]_kw instead.
double waiting_cost(const ODHypergraph& hg, Mode mode, int w, const WaitFractions& f, const TravelTables& t,
                    double beta, PoolWaitRule rule = PoolWaitRule::literal);

struct Friction {
  double value = 0.0;
  bool capped = false;  // q*phi was below epsilon
};

// beta A^(-1/a2) zflow^((1-a2)/a2) max(q phi, eps)^(-a1/a2)
Friction search_friction(double beta, const MatchingConstants& c, double zflow, double q, double phi);

// Vehicle inflow that enters the friction term: the solo edge for e-solo, the
// OO inflow into w-bar for e-pooling.
double friction_flow(const ODHypergraph& hg, Mode mode, int w, const std::vector<double>& z);

// beta * sum over paths h of pair w, sum over edges of h, of lambda^(w).
double surp_pas_cost(const ODHypergraph& hg, Mode mode, int w, const MatchDuals& duals, double beta);

struct UtilityItems {
  double fare = 0.0;
  double waiting = 0.0;
  double surplus = 0.0;
  double friction = 0.0;
  double surp_pas = 0.0;
  double od_cost = 0.0;
  double total() const { return fare + waiting + surplus + friction + surp_pas + od_cost; }
};

// Inputs for one (pair, provider, mode). NaN marks a missing component.
struct UtilityInputs {
  Mode mode = Mode::solo;
  double fare;
  double waiting;
  double phi;
  double friction;
  double surp_pas;
  double time;      // t(o_w, d_w)
  double distance;  // l(o_w, d_w)
  UtilityInputs();
};

// Throws std::invalid_argument naming the first missing component.
UtilityItems modal_utility(const UtilityInputs& in, const Weights& weights);

struct ModalSplit {
  double q_solo = 0.0;
  double q_pool = 0.0;
  double mu = 0.0;
  int iterations = 0;
};

// Bisection on the pooled amount s in [0, q]: gap(s) = U^[p](s) - U^[e](s),
// with the other pairs frozen. Corners when the gap does not change sign.
ModalSplit solve_mode_split(double q, const std::function<std::pair<double, double>(double q_pool)>& utilities,
                            double tol = 1e-12);

// |min(q^m, U^m - mu)| and |sum q - q_w| for one pair over its alternatives.
Residual mode_choice_residual(double q_total, const std::vector<double>& q, const std::vector<double>& u,
                              const std::string& tag);

// Joint clearing of mode choice and dispatch for all providers.
struct MarketProvider {
  std::vector<double> edge_cost;  // effective dispatch edge costs
  std::vector<double> hours;
  double fleet = 0.0;
  double kappa = 0.0;             // weight turning dispatch duals into utility
  std::vector<double> v_solo;     // utility without kappa * phi
  std::vector<double> v_pool;
};

struct MarketProblem {
  std::vector<double> demand;  // q_w
  std::vector<MarketProvider> providers;
  DestDemandRule dest_rule = DestDemandRule::full;
};

struct MarketLp {
  LinearProgram lp;
  std::vector<std::string> var_names;
  std::vector<DispatchRows> blocks;
  std::vector<std::vector<int>> var_solo, var_pool;  // [n][w]
  std::vector<int> conservation;                     // [w]
};

MarketLp build_market_lp(const ODHypergraph& hg, const MarketProblem& p);

struct MarketSolution {
  LpStatus status = LpStatus::iteration_limit;
  std::string infeasible_family;
  std::vector<std::vector<double>> q_solo, q_pool;  // [n][w]
  std::vector<std::vector<double>> z;               // [n][edge]
  std::vector<DispatchDuals> duals;                 // dispatch duals in hours (divided by kappa)
  std::vector<double> mu;                           // [w]
  std::vector<std::vector<int>> support;            // [n] indices of positive columns
};

MarketSolution solve_market(const ODHypergraph& hg, const MarketProblem& p, bool lexicographic = true);

}  // namespace ehaileq
