#include <benchmark/benchmark.h>

#include <string>

#include "ehaileq/dispatch.hpp"
#include "ehaileq/equilibrium.hpp"

using namespace ehaileq;

namespace {

std::string data(const std::string& rel) { return std::string(EHAILEQ_DATA_DIR) + "/" + rel; }

const RoadNetwork& sioux_falls() {
  static const RoadNetwork net = parse_tntp(read_file(data("SiouxFalls_net.tntp")));
  return net;
}

const Instance& six_pairs() {
  static const Instance inst = make_instance(load_scenario_file(data("scenarios/sf_6od_se1.json")));
  return inst;
}

void BM_BuildHypergraph(benchmark::State& st) {
  const std::vector<std::pair<int, int>> od = {{1, 18}, {1, 20}, {2, 18}, {2, 20}, {3, 18}, {3, 20}};
  const std::vector<std::pair<int, int>> pairs(od.begin(), od.begin() + st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(build_hypergraph(sioux_falls(), pairs, 1));
}
BENCHMARK(BM_BuildHypergraph)->Arg(2)->Arg(6);

void BM_DispatchSixPairs(benchmark::State& st) {
  const Instance& inst = six_pairs();
  FareSchedule f = compute_fares(inst.graph, inst.scenario.providers[0], inst.baseline, inst.baseline);
  DispatchProblem p;
  p.costs = compute_edge_costs(inst.graph, inst.baseline, f);
  p.q_solo = {0, 100, 0, 50, 300, 0};
  p.q_pool = {300, 200, 300, 250, 0, 300};
  for (auto _ : st) benchmark::DoNotOptimize(solve_dispatch(inst.graph, p));
}
BENCHMARK(BM_DispatchSixPairs)->Unit(benchmark::kMillisecond);

void BM_UserEquilibrium(benchmark::State& st) {
  RoadNetwork net = sioux_falls();
  scale_capacity(net, 0.02);
  AugmentedDemand dem;
  dem.q[{net.index_of(1), net.index_of(20)}] = 500;
  dem.q[{net.index_of(2), net.index_of(20)}] = 200;
  dem.q[{net.index_of(20), net.index_of(1)}] = 500;
  UeOptions opt;
  opt.method = st.range(0) == 0 ? UeMethod::path_equilibration : UeMethod::frank_wolfe;
  if (opt.method == UeMethod::frank_wolfe) opt.gap = 1e-4;
  for (auto _ : st) benchmark::DoNotOptimize(solve_ue(net, dem, opt));
}
BENCHMARK(BM_UserEquilibrium)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolveEquilibrium(benchmark::State& st) {
  static const char* names[] = {"sf_2od_case1.json", "sf_2od_case2.json", "sf_6od_se1.json"};
  const Instance inst = make_instance(load_scenario_file(data(std::string("scenarios/") + names[st.range(0)])));
  const SolverConfig cfg = solver_config(inst.scenario);
  for (auto _ : st) benchmark::DoNotOptimize(solve_equilibrium(inst, cfg));
}
BENCHMARK(BM_SolveEquilibrium)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
