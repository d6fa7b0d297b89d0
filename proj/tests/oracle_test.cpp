#include <gtest/gtest.h>

#include <random>

#include "ehaileq/oracle.hpp"
#include "test_support.hpp"

using namespace ehaileq;

TEST(Oracle, ModulesAgreeOnSmallInstance) {
  Instance inst = test::instance("small_oracle.json");
  OracleReport r = run_oracle(inst);
  EXPECT_TRUE(r.passed()) << r.max_diff;
  EXPECT_FALSE(r.checks.empty());
}

TEST(Oracle, AgreesAcrossPoolShares) {
  Instance inst = test::instance("small_oracle.json");
  for (double share : {0.0, .25, 1.0}) {
    OracleOptions o;
    o.pool_share = share;
    OracleReport r = run_oracle(inst, o);
    EXPECT_TRUE(r.passed()) << share << ": " << r.max_diff;
  }
}

TEST(Oracle, DetectsPerturbedCost) {
  Instance inst = test::instance("small_oracle.json");
  OracleOptions o;
  o.perturb_cost = .5;
  EXPECT_FALSE(run_oracle(inst, o).passed());
}

TEST(Oracle, RefusesLargeInstances) {
  Instance inst = test::instance("sf_6od_se1.json");
  EXPECT_THROW(run_oracle(inst), OracleTooLarge);
}

TEST(InteriorPoint, MatchesSimplexOnRandomLps) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    LinearProgram lp;
    const int n = 5;
    for (int j = 0; j < n; ++j) lp.add_var(-u(rng));
    for (int i = 0; i < 3; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < n; ++j) row.push_back({j, u(rng)});
      lp.add_row({row, RowSense::le, 1.0 + u(rng), "r" + std::to_string(i)});
    }
    LpResult s = solve_lp(lp);
    IpmResult p = solve_lp_interior(lp);
    ASSERT_EQ(s.status, LpStatus::optimal);
    ASSERT_TRUE(p.converged);
    EXPECT_NEAR(s.objective, p.objective, 1e-8 * std::max(1.0, std::abs(s.objective)));
  }
}
