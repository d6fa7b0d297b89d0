#include <gtest/gtest.h>

#include <random>

#include "ehaileq/modechoice.hpp"
#include "test_support.hpp"

using namespace ehaileq;

namespace {

std::vector<double> zero_flows(const ODHypergraph& hg) { return std::vector<double>(hg.num_edges(), 0.0); }

}  // namespace

TEST(WaitFractions, SharesOfInflow) {
  Instance inst = test::instance("sf_6od_se1.json");
  const auto& hg = inst.graph;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    auto z = zero_flows(hg);
    for (double& v : z) v = trial % 3 == 0 ? 0.0 : u(rng);
    WaitFractions f = solve_wait_fractions(hg, z);
    EXPECT_LT(wait_fraction_residual(hg, z, f).value, 1e-9);
    for (int w = 0; w < 6; ++w) {
      double Z = 0.0;
      for (int v = 0; v < 6; ++v) Z += z[hg.edge_index(EdgeKind::rebalance, v, w)];
      for (int v = 0; v < 6; ++v) {
        const double expect = Z > 0 ? z[hg.edge_index(EdgeKind::rebalance, v, w)] / Z : 0.0;
        EXPECT_NEAR(f.o[v][w], expect, 1e-15);
      }
    }
  }
}

TEST(WaitFractions, ResidualDetectsWrongShares) {
  Instance inst = test::instance("small_oracle.json");
  auto z = zero_flows(inst.graph);
  z[inst.graph.edge_index(EdgeKind::rebalance, 0, 0)] = 1.0;
  z[inst.graph.edge_index(EdgeKind::rebalance, 1, 0)] = 3.0;
  WaitFractions f = solve_wait_fractions(inst.graph, z);
  EXPECT_NEAR(f.o[0][0], .25, 1e-15);
  f.o[0][0] = .5;
  // min(o, Z o - z_v) = min(.5, 4 * .5 - 1)
  EXPECT_NEAR(wait_fraction_residual(inst.graph, z, f).value, .5, 1e-15);
}

TEST(WaitingCost, HandComputedOnSmallNetwork) {
  Instance inst = test::instance("small_oracle.json");
  const auto& hg = inst.graph;
  auto z = zero_flows(hg);
  z[hg.edge_index(EdgeKind::rebalance, 0, 0)] = 1;
  z[hg.edge_index(EdgeKind::rebalance, 1, 0)] = 1;
  z[hg.edge_index(EdgeKind::rebalance, 1, 1)] = 2;
  WaitFractions f = solve_wait_fractions(hg, z);
  // Both pairs end at node 3; t(3,1) = 1.5, t(3,2) = 1, t(2,1) = .5.
  const double own0 = 1.5, own1 = 1.0;
  EXPECT_NEAR(waiting_cost(hg, Mode::solo, 0, f, inst.baseline, .5), .5 * own0, 1e-12);
  EXPECT_NEAR(waiting_cost(hg, Mode::solo, 1, f, inst.baseline, .5), .5 * own1, 1e-12);
  // No pooled pickup flows into origin 1 yet.
  EXPECT_NEAR(waiting_cost(hg, Mode::pool, 0, f, inst.baseline, .5, PoolWaitRule::literal), .5 * (own0 + own1),
              1e-12);
  EXPECT_NEAR(waiting_cost(hg, Mode::pool, 0, f, inst.baseline, .5, PoolWaitRule::normalized), .5 * own0, 1e-12);
  z[hg.edge_index(EdgeKind::oo, 1, 0)] = 2;
  f = solve_wait_fractions(hg, z);
  EXPECT_NEAR(f.o_pool[1][0], 1.0, 1e-15);
  EXPECT_NEAR(waiting_cost(hg, Mode::pool, 0, f, inst.baseline, .5), .5 * (own0 + own1 + .5), 1e-12);
}

TEST(SearchFriction, DouglasForm) {
  MatchingConstants c;  // A .2, alpha1 = alpha2 = 1
  Friction f = search_friction(.4, c, 7.0, 10.0, .5);
  EXPECT_NEAR(f.value, .4 / (.2 * 10 * .5), 1e-15);
  EXPECT_FALSE(f.capped);
  Friction cap = search_friction(.4, c, 7.0, 0.0, .5);
  EXPECT_TRUE(cap.capped);
  EXPECT_NEAR(cap.value, .4 / (.2 * 1e-6), 1e-3);
  c.alpha1 = .5;
  c.alpha2 = 2.0;
  Friction g = search_friction(1.0, c, 4.0, 2.0, 2.0);
  EXPECT_NEAR(g.value, std::pow(.2, -.5) * std::pow(4.0, -.5) * std::pow(4.0, -.25), 1e-14);
  EXPECT_EQ(search_friction(0.0, MatchingConstants{}, 1, 0, 0).value, 0.0);
}

TEST(SearchFriction, DecreasesInDemandAndWaiting) {
  MatchingConstants c;
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {1.0, 2.0, 5.0, 50.0}) {
    const double v = search_friction(1.0, c, 1.0, q, .3).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Utility, ItemizationSumsToTotal) {
  Weights wt;
  wt.surp = {.1, .4};
  wt.in_veh = .2;
  wt.inc1 = .2;
  wt.inc2 = .3;
  UtilityInputs e, p;
  e.mode = Mode::solo;
  p.mode = Mode::pool;
  for (UtilityInputs* in : {&e, &p}) {
    in->fare = 1.7;
    in->waiting = .3;
    in->phi = .6;
    in->friction = .05;
    in->surp_pas = 0.0;
    in->time = 1.5;
    in->distance = 2.0;
  }
  p.fare = .8 * 1.7;
  UtilityItems ue = modal_utility(e, wt), up = modal_utility(p, wt);
  EXPECT_DOUBLE_EQ(ue.total(), ue.fare + ue.waiting + ue.surplus + ue.friction + ue.surp_pas + ue.od_cost);
  EXPECT_DOUBLE_EQ(ue.surplus, .1 * .6);
  EXPECT_DOUBLE_EQ(up.surplus, .4 * .6);
  EXPECT_DOUBLE_EQ(ue.od_cost, .2 * 1.5);
  EXPECT_DOUBLE_EQ(up.od_cost, .2 * 1.5 + .2 * 1.5 + .3 * 2.0);
  const double gap = (up.fare - ue.fare) + (up.waiting - ue.waiting) + (up.surplus - ue.surplus) +
                     (up.friction - ue.friction) + (up.surp_pas - ue.surp_pas) + (up.od_cost - ue.od_cost);
  EXPECT_NEAR(up.total() - ue.total(), gap, 1e-15);
}

TEST(Utility, MissingComponentIsNamed) {
  UtilityInputs in;
  in.fare = 1;
  in.waiting = 0;
  in.phi = 0;
  in.surp_pas = 0;
  in.time = 1;
  in.distance = 1;
  try {
    modal_utility(in, Weights{});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("friction"), std::string::npos);
  }
}

TEST(ModeSplit, InteriorCrossingMatchesClosedForm) {
  // U_e = 1 + (q - s), U_p = .5 + s: the gap vanishes at s = (.5 + q) / 2.
  const double q = 2.0;
  auto u = [&](double s) { return std::make_pair(1.0 + (q - s), .5 + s); };
  ModalSplit m = solve_mode_split(q, u);
  EXPECT_NEAR(m.q_pool, 1.25, 1e-10);
  EXPECT_NEAR(m.q_solo + m.q_pool, q, 1e-15);
  EXPECT_NEAR(m.mu, 1.75, 1e-10);
}

TEST(ModeSplit, Corners) {
  auto solo_better = [](double) { return std::make_pair(1.0, 2.0); };
  auto pool_better = [](double) { return std::make_pair(2.0, 1.0); };
  ModalSplit a = solve_mode_split(3.0, solo_better);
  EXPECT_EQ(a.q_solo, 3.0);
  EXPECT_EQ(a.q_pool, 0.0);
  EXPECT_EQ(a.mu, 1.0);
  ModalSplit b = solve_mode_split(3.0, pool_better);
  EXPECT_EQ(b.q_pool, 3.0);
  EXPECT_EQ(b.mu, 1.0);
  ModalSplit z = solve_mode_split(0.0, solo_better);
  EXPECT_EQ(z.q_solo + z.q_pool, 0.0);
}

TEST(ModeSplit, ChoiceResidual) {
  EXPECT_EQ(mode_choice_residual(1.0, {1.0, 0.0}, {1.0, 2.0}, "w").value, 0.0);
  EXPECT_NEAR(mode_choice_residual(2.0, {1.0, 1.0}, {1.0, 2.0}, "w").value, 1.0, 1e-15);
  EXPECT_NEAR(mode_choice_residual(3.0, {1.0, 1.0}, {1.0, 1.0}, "w").value, 1.0, 1e-15);
}

TEST(Market, ClearsDemandAndPicksCheaperMode) {
  Instance inst = test::instance("small_oracle.json");
  const auto& hg = inst.graph;
  FareSchedule f = compute_fares(hg, inst.scenario.providers[0], inst.baseline, inst.baseline);
  EdgeCostTable c = compute_edge_costs(hg, inst.baseline, f);
  MarketProblem mp;
  mp.demand = {2, 1};
  MarketProvider pr;
  pr.edge_cost = c.cost;
  pr.hours = c.hours;
  pr.fleet = std::numeric_limits<double>::infinity();
  pr.kappa = .1;
  pr.v_solo = {1.0, 1.0};
  pr.v_pool = {50.0, 50.0};
  mp.providers.push_back(pr);
  MarketSolution s = solve_market(hg, mp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  for (int w = 0; w < 2; ++w) {
    EXPECT_NEAR(s.q_solo[0][w], mp.demand[w], 1e-12);
    EXPECT_NEAR(s.q_pool[0][w], 0.0, 1e-12);
  }
  mp.providers[0].fleet = 1.0;
  MarketSolution t = solve_market(hg, mp);
  EXPECT_EQ(t.status, LpStatus::infeasible);
  EXPECT_EQ(t.infeasible_family, "fleet");
}

TEST(Market, EarlierProviderWinsTies) {
  Instance inst = test::instance("small_oracle.json");
  const auto& hg = inst.graph;
  FareSchedule f = compute_fares(hg, inst.scenario.providers[0], inst.baseline, inst.baseline);
  EdgeCostTable c = compute_edge_costs(hg, inst.baseline, f);
  MarketProvider pr;
  pr.edge_cost = c.cost;
  pr.hours = c.hours;
  pr.fleet = std::numeric_limits<double>::infinity();
  pr.kappa = .1;
  pr.v_solo = {1.0, 1.0};
  pr.v_pool = {50.0, 50.0};
  MarketProblem mp;
  mp.demand = {2, 1};
  mp.providers = {pr, pr};
  MarketSolution s = solve_market(hg, mp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.q_solo[0][0], 2.0, 1e-12);
  EXPECT_NEAR(s.q_solo[0][1], 1.0, 1e-12);
}
