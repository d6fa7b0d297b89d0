#include <gtest/gtest.h>

#include <random>

#include "ehaileq/assignment.hpp"
#include "ehaileq/dispatch.hpp"
#include "test_support.hpp"

using namespace ehaileq;

namespace {

DispatchProblem free_flow_problem(const Instance& inst, std::vector<double> qs, std::vector<double> qp) {
  FareSchedule f = compute_fares(inst.graph, inst.scenario.providers[0], inst.baseline, inst.baseline);
  DispatchProblem p;
  p.costs = compute_edge_costs(inst.graph, inst.baseline, f);
  p.q_solo = std::move(qs);
  p.q_pool = std::move(qp);
  p.fleet = inst.scenario.providers[0].fleet;
  return p;
}

double max_imbalance(const ODHypergraph& hg, const std::vector<double>& z) {
  double worst = 0.0, scale = 1.0;
  for (double v : z) scale = std::max(scale, std::abs(v));
  for (const auto& n : hg.nodes()) {
    double in = 0.0, out = 0.0;
    for (int e : hg.in_edges(n)) in += z[e];
    for (int e : hg.out_edges(n)) out += z[e];
    worst = std::max(worst, std::abs(in - out));
  }
  return worst / scale;
}

}  // namespace

TEST(Dispatch, FaresFollowBaseFareRule) {
  Instance inst = test::instance("small_oracle.json");
  FareSchedule f = compute_fares(inst.graph, inst.scenario.providers[0], inst.baseline, inst.baseline);
  // Pair (1,3): F .2 + l 1.5; pair (2,3): F .3 + l 1. Pooling fare scaled by .8.
  EXPECT_NEAR(f.solo[0], 1.7, 1e-12);
  EXPECT_NEAR(f.solo[1], 1.3, 1e-12);
  EXPECT_NEAR(f.pool[0], .8 * 1.7, 1e-12);
  EXPECT_NEAR(f.pool[1], .8 * 1.3, 1e-12);
}

TEST(Dispatch, AllSoloMatchesTransportOracle) {
  Instance inst = test::instance("small_oracle.json");
  DispatchProblem p = free_flow_problem(inst, {2, 1}, {0, 0});
  p.fleet = std::numeric_limits<double>::infinity();
  DispatchSolution s = solve_dispatch(inst.graph, p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  // Both pairs end at node 3, so every rebalancing plan costs
  // q1 t(3,1) + q2 t(3,2) = 2 * 1.5 + 1 * 1; solo legs earn t - r.
  const double expect = 2 * (1.5 - 1.7) + 1 * (1.0 - 1.3) + 2 * 1.5 + 1 * 1.0;
  EXPECT_NEAR(s.objective, expect, 1e-10);
  EXPECT_NEAR(s.dual_objective, expect, 1e-10);
  for (int e : inst.graph.edges_of(EdgeKind::solo)) EXPECT_NEAR(s.z[e], p.q_solo[inst.graph.edges()[e].w], 1e-12);
  EXPECT_NEAR(fleet_hours(p.costs, s.z), 2 * 1.5 + 1 * 1.0 + 2 * 1.5 + 1 * 1.0, 1e-10);
}

TEST(Dispatch, RandomDemandsSatisfyConservationAndKkt) {
  Instance inst = test::instance("sf_6od_se1.json");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 400.0);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> qs(6), qp(6);
    for (int w = 0; w < 6; ++w) {
      qs[w] = u(rng);
      qp[w] = trial % 2 ? u(rng) : 0.0;
    }
    DispatchProblem p = free_flow_problem(inst, qs, qp);
    DispatchSolution s = solve_dispatch(inst.graph, p);
    ASSERT_EQ(s.status, LpStatus::optimal);
    EXPECT_LT(max_imbalance(inst.graph, s.z), 1e-9);
    EXPECT_LT(ncp_residual_dispatch(inst.graph, p, s.z, s.duals).value, 1e-7);
    for (double v : s.z) EXPECT_GE(v, 0.0);
    for (int w = 0; w < 6; ++w) EXPECT_GE(s.z[inst.graph.edge_index(EdgeKind::solo, w, w)], qs[w] - 1e-9);
  }
}

TEST(Dispatch, FleetLimitIsRespected) {
  Instance inst = test::instance("small_oracle.json");
  DispatchProblem p = free_flow_problem(inst, {2, 1}, {0, 0});
  p.fleet = 8.0;  // exactly the all-solo need at free flow
  DispatchSolution s = solve_dispatch(inst.graph, p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_LE(fleet_hours(p.costs, s.z), 8.0 + 1e-9);
  EXPECT_GE(s.duals.lambda_fleet, 0.0);
}

TEST(Dispatch, InfeasibilityNamesTheFamily) {
  Instance inst = test::instance("small_oracle.json");
  DispatchProblem p = free_flow_problem(inst, {2, 1}, {0, 0});
  p.fleet = 7.0;
  DispatchSolution s = solve_dispatch(inst.graph, p);
  EXPECT_EQ(s.status, LpStatus::infeasible);
  EXPECT_EQ(s.infeasible_family, "fleet");
}

TEST(Dispatch, PooledDemandIsPickedUpAndDroppedOff) {
  Instance inst = test::instance("small_oracle.json");
  DispatchProblem p = free_flow_problem(inst, {0, 0}, {1, 1});
  p.fleet = std::numeric_limits<double>::infinity();
  DispatchSolution s = solve_dispatch(inst.graph, p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  const auto& hg = inst.graph;
  for (int w = 0; w < 2; ++w) {
    double pick = s.z[hg.edge_index(EdgeKind::vo_pool, w, w)], drop = s.z[hg.edge_index(EdgeKind::vd_pool, w, w)];
    for (int k = 0; k < 2; ++k)
      if (k != w) {
        pick += s.z[hg.edge_index(EdgeKind::oo, k, w)];
        drop += s.z[hg.edge_index(EdgeKind::dd, w, k)];
      }
    EXPECT_GE(pick, 1.0 - 1e-9);
    EXPECT_GE(drop, 1.0 - 1e-9);
  }
  EXPECT_LT(max_imbalance(hg, s.z), 1e-12);
  EXPECT_LT(ncp_residual_dispatch(hg, p, s.z, s.duals).value, 1e-9);
}

TEST(Dispatch, SearchCostRaisesPoolingEdgesOnly) {
  Instance inst = test::instance("small_oracle.json");
  DispatchProblem p = free_flow_problem(inst, {1, 1}, {1, 1});
  p.search_cost = {0.25, 0.5};
  auto c = effective_edge_costs(inst.graph, p);
  for (int e = 0; e < inst.graph.num_edges(); ++e) {
    const auto& ed = inst.graph.edges()[e];
    const bool leaves_origin = ed.kind == EdgeKind::oo || ed.kind == EdgeKind::od;
    EXPECT_DOUBLE_EQ(c[e], p.costs.cost[e] + (leaves_origin ? p.search_cost[ed.w] : 0.0)) << edge_label(ed);
  }
}

TEST(Dispatch, SurplusReportFlagsBindingSupply) {
  Instance inst = test::instance("small_oracle.json");
  // 5 of the 7 fleet hours
  DispatchProblem p = free_flow_problem(inst, {1, 1}, {0, 0});
  DispatchSolution s = solve_dispatch(inst.graph, p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  auto rep = surplus_report(inst.graph, p, s.z, s.duals);
  bool has_solo = false;
  for (const auto& r : rep) {
    if (r.row == "solo") {
      has_solo = true;
      EXPECT_GE(r.supply, r.demand - 1e-9);
    }
  }
  EXPECT_TRUE(has_solo);
}
