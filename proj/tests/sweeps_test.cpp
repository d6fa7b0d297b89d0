#include <gtest/gtest.h>

#include "ehaileq/sweeps.hpp"
#include "test_support.hpp"

using namespace ehaileq;

namespace {

SweepSpec case2_spec(std::vector<double> grid, int jobs) {
  SweepSpec s;
  s.base = read_config_file(test::data_path("scenarios/sf_2od_case2.json"));
  s.base_dir = test::data_path("scenarios");
  s.param = "providers.0.gamma";
  s.grid = std::move(grid);
  s.jobs = jobs;
  return s;
}

SweepPoint synthetic_point(double value, double q, double pool) {
  SweepPoint p;
  p.value = value;
  p.state.feasible = true;
  p.state.converged = true;
  ProviderState ps;
  ps.q_solo = {q - pool};
  ps.q_pool = {pool};
  p.state.providers = {ps};
  p.demand = {q};
  return p;
}

}  // namespace

TEST(Grid, RangeIsInclusive) {
  auto g = parse_grid("0:0.05:1");
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  EXPECT_DOUBLE_EQ(g[7], .35);
}

TEST(Grid, CommaList) {
  auto g = parse_grid("0.1,0.4,2");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[2], 2.0);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(parse_grid(""), ValidationError);
  EXPECT_THROW(parse_grid("0.5,0.2,0.9"), ValidationError);
  EXPECT_THROW(parse_grid("0.5,0.5"), ValidationError);
  EXPECT_THROW(parse_grid("1:0.1:0"), ValidationError);
  EXPECT_THROW(parse_grid("a,b"), ValidationError);
  EXPECT_THROW(check_grid({}), ValidationError);
}

TEST(Sweep, SinglePointEqualsDirectSolve) {
  SweepSpec spec = case2_spec({.3}, 1);
  SweepResult r = run_sweep(spec);
  ASSERT_EQ(r.points.size(), 1u);
  nlohmann::json c = spec.base;
  c["providers"][0]["gamma"] = .3;
  c["network"]["file"] = test::data_path("scenarios/" + c["network"]["file"].get<std::string>());
  Instance inst = make_instance(load_scenario(c));
  EquilibriumState s = solve_equilibrium(inst, solver_config(inst.scenario));
  const auto& p = r.points[0];
  ASSERT_TRUE(p.error.empty()) << p.error;
  EXPECT_EQ(p.state.links.x, s.links.x);
  EXPECT_EQ(p.state.providers[0].q_pool, s.providers[0].q_pool);
  EXPECT_EQ(p.state.iterations, s.iterations);
}

TEST(Sweep, ParallelMatchesSerial) {
  SweepResult a = run_sweep(case2_spec({0, .25, .5, .75, 1}, 1));
  SweepResult b = run_sweep(case2_spec({0, .25, .5, .75, 1}, 4));
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].value, b.points[i].value);
    EXPECT_EQ(a.points[i].state.links.x, b.points[i].state.links.x);
    EXPECT_EQ(a.points[i].od_time, b.points[i].od_time);
  }
}

TEST(Sweep, BadParameterIsReportedPerPoint) {
  SweepSpec spec = case2_spec({.5}, 1);
  spec.param = "providers.0.gamma_typo";
  SweepResult r = run_sweep(spec);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_FALSE(r.points[0].error.empty());
}

TEST(Threshold, FindsFirstCellLeavingACorner) {
  SweepResult r;
  r.points = {synthetic_point(0, 10, 0), synthetic_point(.1, 10, 0), synthetic_point(.2, 10, 4),
              synthetic_point(.3, 10, 10)};
  Threshold t = threshold_detect(r, 0, Mode::pool);
  ASSERT_TRUE(t.found);
  EXPECT_DOUBLE_EQ(t.value, .15);
  EXPECT_DOUBLE_EQ(t.half_width, .05);
  Threshold solo = threshold_detect(r, 0, Mode::solo);
  ASSERT_TRUE(solo.found);
  EXPECT_DOUBLE_EQ(solo.value, .15);
}

TEST(Threshold, NoneWhenShareNeverMoves) {
  SweepResult r;
  r.points = {synthetic_point(0, 10, 0), synthetic_point(.5, 10, 0), synthetic_point(1, 10, 0)};
  Threshold t = threshold_detect(r, 0, Mode::pool);
  EXPECT_FALSE(t.found);
  EXPECT_EQ(t.text(), "none");
}

TEST(Threshold, SkipsFailedPoints) {
  SweepResult r;
  r.points = {synthetic_point(0, 10, 0), synthetic_point(.5, 10, 5), synthetic_point(1, 10, 10)};
  r.points[1].state.feasible = false;
  EXPECT_FALSE(threshold_detect(r, 0, Mode::pool).found);
}
