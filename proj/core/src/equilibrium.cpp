#include "ehaileq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehaileq {

Instance make_instance(const Scenario& sc, RoadNetwork net) {
  if (sc.capacity_scale != 1.0) scale_capacity(net, sc.capacity_scale);
  mark_od_nodes(net, sc.od_list());
  ODHypergraph hg = build_hypergraph(net, sc.od_list(), sc.num_providers());
  TravelTables base = free_flow_tables(net, hg);
  return Instance{sc, std::move(net), std::move(hg), std::move(base)};
}

Instance make_instance(const Scenario& sc) {
  if (sc.network_file.empty()) throw ValidationError("network.file", "no network file given");
  const std::string trips = sc.trips_file.empty() ? std::string() : read_file(sc.trips_file);
  return make_instance(sc, parse_tntp(read_file(sc.network_file), trips));
}

SolverConfig solver_config(const Scenario& sc) {
  SolverConfig c;
  c.tol = sc.solver.tol;
  c.max_iter = sc.solver.max_iter;
  c.damping = sc.solver.damping;
  c.damping_factor = sc.solver.damping_factor;
  c.ue.gap = sc.solver.ue_gap;
  c.ue.max_iter = sc.solver.ue_max_iter;
  c.lexicographic = sc.solver.lexicographic;
  c.seed = sc.solver.seed;
  return c;
}

ProviderDerived derive_provider(const Instance& inst, const TravelTables& t, int n, const ProviderState& ps) {
  const auto& hg = inst.graph;
  const auto& sc = inst.scenario;
  const auto& wt = sc.weights;
  const int W = hg.num_pairs();
  const double rho = sc.dest_demand == DestDemandRule::half ? 0.5 : 1.0;
  ProviderDerived d;
  d.fares = compute_fares(hg, sc.providers[n], t, inst.baseline);
  d.costs = compute_edge_costs(hg, t, d.fares);
  d.fractions = solve_wait_fractions(hg, ps.z);
  const bool have_lambda = !ps.match_duals.lambda.empty();
  for (int w = 0; w < W; ++w) {
    const auto& p = hg.pair(w);
    d.wait_solo.push_back(waiting_cost(hg, Mode::solo, w, d.fractions, t, wt.wt.solo, sc.pool_wait));
    d.wait_pool.push_back(waiting_cost(hg, Mode::pool, w, d.fractions, t, wt.wt.pool, sc.pool_wait));
    const double phi_e = ps.duals.phi_solo.empty() ? 0.0 : ps.duals.phi_solo[w];
    // Shadow price of one pooled rider: pickup row plus weighted drop-off row.
    // The LP may place all of it on either row.
    const double phi_p = ps.duals.phi_pool_origin.empty()
                             ? 0.0
                             : ps.duals.phi_pool_origin[w] + rho * ps.duals.phi_pool_dest[w];
    d.friction_solo.push_back(
        search_friction(wt.se.solo, sc.matching, friction_flow(hg, Mode::solo, w, ps.z), ps.q_solo[w], phi_e));
    d.friction_pool.push_back(
        search_friction(wt.se.pool, sc.matching, friction_flow(hg, Mode::pool, w, ps.z), ps.q_pool[w], phi_p));
    d.surp_pas_solo.push_back(have_lambda ? surp_pas_cost(hg, Mode::solo, w, ps.match_duals, wt.surp_pas.solo) : 0.0);
    d.surp_pas_pool.push_back(have_lambda ? surp_pas_cost(hg, Mode::pool, w, ps.match_duals, wt.surp_pas.pool) : 0.0);
    UtilityInputs in;
    in.time = t.t(p.origin, p.destination);
    in.distance = t.l(p.origin, p.destination);
    in.mode = Mode::solo;
    in.fare = d.fares.solo[w];
    in.waiting = d.wait_solo[w];
    in.phi = phi_e;
    in.friction = d.friction_solo[w].value;
    in.surp_pas = d.surp_pas_solo[w];
    d.u_solo.push_back(modal_utility(in, wt));
    in.mode = Mode::pool;
    in.fare = d.fares.pool[w];
    in.waiting = d.wait_pool[w];
    in.phi = phi_p;
    in.friction = d.friction_pool[w].value;
    in.surp_pas = d.surp_pas_pool[w];
    d.u_pool.push_back(modal_utility(in, wt));
  }
  return d;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Grid = std::vector<std::vector<double>>;  // [provider][pair]

struct Coupling {
  TravelTables tables;
  Grid wait_solo, wait_pool, fric_solo, fric_pool, sp_solo, sp_pool, phi_o, phi_d;
};

Coupling cold_coupling(const Instance& inst) {
  const int N = inst.scenario.num_providers(), W = inst.graph.num_pairs();
  Grid zero(N, std::vector<double>(W, 0.0));
  return Coupling{inst.baseline, zero, zero, zero, zero, zero, zero, zero, zero};
}

Coupling coupling_of(const EquilibriumState& s, const std::vector<ProviderDerived>& d) {
  Coupling c;
  c.tables = s.tables;
  for (std::size_t n = 0; n < d.size(); ++n) {
    c.wait_solo.push_back(d[n].wait_solo);
    c.wait_pool.push_back(d[n].wait_pool);
    std::vector<double> fs, fp;
    for (const auto& f : d[n].friction_solo) fs.push_back(f.value);
    for (const auto& f : d[n].friction_pool) fp.push_back(f.value);
    c.fric_solo.push_back(fs);
    c.fric_pool.push_back(fp);
    c.sp_solo.push_back(d[n].surp_pas_solo);
    c.sp_pool.push_back(d[n].surp_pas_pool);
    c.phi_o.push_back(s.providers[n].duals.phi_pool_origin);
    c.phi_d.push_back(s.providers[n].duals.phi_pool_dest);
  }
  return c;
}

void blend(std::vector<double>& a, const std::vector<double>& b, double step) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::isfinite(a[i]) && std::isfinite(b[i])) a[i] += step * (b[i] - a[i]);
}

Coupling blended(const Coupling& from, const Coupling& to, double step) {
  Coupling c = from;
  blend(c.tables.time, to.tables.time, step);
  blend(c.tables.dist, to.tables.dist, step);
  auto mix = [&](Grid& a, const Grid& b) {
    for (std::size_t n = 0; n < a.size(); ++n) blend(a[n], b[n], step);
  };
  mix(c.wait_solo, to.wait_solo);
  mix(c.wait_pool, to.wait_pool);
  mix(c.fric_solo, to.fric_solo);
  mix(c.fric_pool, to.fric_pool);
  mix(c.sp_solo, to.sp_solo);
  mix(c.sp_pool, to.sp_pool);
  mix(c.phi_o, to.phi_o);
  mix(c.phi_d, to.phi_d);
  return c;
}

struct Iterate {
  EquilibriumState state;
  std::vector<std::vector<int>> support;
  std::vector<EdgeCostTable> costs;
  std::string infeasible;
};

Iterate run_block(const Instance& inst, const SolverConfig& cfg, const Coupling& c) {
  const auto& hg = inst.graph;
  const auto& sc = inst.scenario;
  const auto& wt = sc.weights;
  const int N = sc.num_providers(), W = hg.num_pairs(), E = hg.num_edges();
  const double rho = sc.dest_demand == DestDemandRule::half ? 0.5 : 1.0;
  Iterate it;
  MarketProblem mp;
  mp.dest_rule = sc.dest_demand;
  for (const auto& d : sc.demands) mp.demand.push_back(d.rate);
  for (int n = 0; n < N; ++n) {
    const Provider& pr = sc.providers[n];
    FareSchedule fares = compute_fares(hg, pr, c.tables, inst.baseline);
    DispatchProblem dp;
    dp.costs = compute_edge_costs(hg, c.tables, fares);
    dp.search_cost = c.fric_pool[n];
    it.costs.push_back(dp.costs);
    MarketProvider m;
    m.edge_cost = effective_edge_costs(hg, dp);
    m.hours = dp.costs.hours;
    m.fleet = pr.fleet;
    m.kappa = wt.surp.solo;
    for (int w = 0; w < W; ++w) {
      const auto& p = hg.pair(w);
      const double t = c.tables.t(p.origin, p.destination), l = c.tables.l(p.origin, p.destination);
      m.v_solo.push_back(fares.solo[w] + c.wait_solo[n][w] + c.fric_solo[n][w] + c.sp_solo[n][w] + wt.in_veh * t);
      m.v_pool.push_back(fares.pool[w] + c.wait_pool[n][w] + c.fric_pool[n][w] + c.sp_pool[n][w] +
                         (wt.in_veh + wt.inc1) * t + wt.inc2 * l + (wt.surp.pool - m.kappa) * (c.phi_o[n][w] + rho * c.phi_d[n][w]));
    }
    mp.providers.push_back(std::move(m));
  }
  MarketSolution ms = solve_market(hg, mp, cfg.lexicographic);
  if (ms.status != LpStatus::optimal) {
    it.infeasible = ms.infeasible_family.empty() ? to_string(ms.status) : ms.infeasible_family;
    return it;
  }
  it.support = ms.support;
  auto& s = it.state;
  s.feasible = true;
  s.mu = ms.mu;
  std::vector<std::vector<double>> qs, zs;
  for (int n = 0; n < N; ++n) {
    ProviderState ps;
    ps.q_solo = ms.q_solo[n];
    ps.q_pool = ms.q_pool[n];
    ps.z = ms.z[n];
    ps.duals = ms.duals[n];
    MatchingProblem mq{ps.z, ps.q_solo, ps.q_pool, it.costs[n].hours, c.wait_pool[n]};
    MatchingSolution sol = solve_matching(hg, mq, cfg.lexicographic);
    ps.matching_status = sol.status;
    if (sol.status == LpStatus::optimal) {
      ps.y = sol.y;
      ps.match_duals = sol.duals;
    } else {
      ps.y.solo.assign(W, 0.0);
      ps.y.pool.assign(W, std::vector<double>(E, 0.0));
      auto& md = ps.match_duals;
      md.phi_plus.assign(W, 0.0);
      md.phi_minus.assign(W, 0.0);
      md.phi_solo.assign(W, 0.0);
      md.lambda_solo.assign(W, 0.0);
      md.pi_origin.assign(W, std::vector<double>(W, 0.0));
      md.pi_dest.assign(W, std::vector<double>(W, 0.0));
      md.lambda.assign(W, std::vector<double>(E, 0.0));
    }
    qs.push_back(ps.q_solo);
    zs.push_back(ps.z);
    s.providers.push_back(std::move(ps));
  }
  s.demand = assemble_demand(hg, qs, zs);
  s.links = solve_ue(inst.network, s.demand, cfg.ue);
  s.tables = od_times_and_distances(inst.network, s.links.t, hg);
  return it;
}

}  // namespace

EquilibriumState solve_equilibrium(const Instance& inst, const SolverConfig& cfg) {
  Coupling c = cold_coupling(inst);
  EquilibriumState best;
  best.residual.value = kInf;
  best.status = "not started";
  std::vector<std::vector<int>> prev_support;
  int changes = 0;
  Coupling target = c;
  double step = 1.0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    IterationRecord rec;
    rec.iteration = k;
    Iterate it;
    Coupling trial = k == 1 ? c : blended(c, target, step);
    double a = step;
    while (true) {
      it = run_block(inst, cfg, trial);
      if (it.infeasible.empty() || k == 1 || rec.backtracks >= cfg.max_backtracks) break;
      a *= 0.5;
      ++rec.backtracks;
      trial = blended(c, target, a);
    }
    rec.step = k == 1 ? 1.0 : a;
    if (!it.infeasible.empty()) {
      rec.residual = kInf;
      rec.where = "market clearing: " + it.infeasible;
      if (!best.feasible) {
        best.status = "infeasible: " + it.infeasible;
        best.iterations = k;
        best.residual.value = kInf;
        best.residual.where = rec.where;
      }
      best.trace.push_back(rec);
      best.converged = false;
      if (best.feasible) best.status = "infeasible after iteration " + std::to_string(k - 1) + ": " + it.infeasible;
      return best;
    }
    c = trial;
    EquilibriumState& s = it.state;
    s.residual = unified_residual(inst, s);
    rec.residual = s.residual.value;
    rec.where = s.residual.where;
    rec.support_changed = k > 1 && it.support != prev_support;
    if (rec.support_changed) ++changes;
    prev_support = it.support;
    std::vector<ProviderDerived> derived;
    for (int n = 0; n < inst.scenario.num_providers(); ++n)
      derived.push_back(derive_provider(inst, s.tables, n, s.providers[n]));
    target = coupling_of(s, derived);
    step = cfg.damping == Damping::fixed ? cfg.damping_factor : 1.0 / (changes + 1);
    std::vector<IterationRecord> trace = best.trace;
    trace.push_back(rec);
    s.iterations = k;
    if (!best.feasible || s.residual.value <= best.residual.value) {
      best = std::move(s);
    }
    best.trace = std::move(trace);
    best.iterations = k;
    if (best.residual.value < cfg.tol) {
      best.converged = true;
      best.status = "converged";
      return best;
    }
  }
  best.converged = false;
  best.status = "iteration limit";
  return best;
}

ResidualBreakdown residual_breakdown(const Instance& inst, const EquilibriumState& s) {
  ResidualBreakdown b;
  if (!s.feasible) {
    b.total.value = kInf;
    b.total.where = s.status;
    return b;
  }
  const auto& hg = inst.graph;
  const auto& sc = inst.scenario;
  const int N = sc.num_providers(), W = hg.num_pairs();
  std::vector<double> t(inst.network.num_links());
  for (int e = 0; e < inst.network.num_links(); ++e) t[e] = bpr_time(inst.network.links[e], s.links.x[e]);
  const TravelTables T = od_times_and_distances(inst.network, t, hg);
  std::vector<ProviderDerived> d;
  std::vector<std::vector<double>> qs, zs;
  for (int n = 0; n < N; ++n) {
    const ProviderState& ps = s.providers[n];
    d.push_back(derive_provider(inst, T, n, ps));
    const std::string tag = "provider " + std::to_string(n + 1) + " ";
    DispatchProblem dp;
    dp.costs = d[n].costs;
    dp.q_solo = ps.q_solo;
    dp.q_pool = ps.q_pool;
    dp.fleet = sc.providers[n].fleet;
    dp.dest_rule = sc.dest_demand;
    for (const auto& f : d[n].friction_pool) dp.search_cost.push_back(f.value);
    b.dispatch.merge(ncp_residual_dispatch(hg, dp, ps.z, ps.duals), tag + "dispatch ");
    MatchingProblem mp{ps.z, ps.q_solo, ps.q_pool, d[n].costs.hours, d[n].wait_pool};
    b.matching.merge(ncp_residual_matching(hg, mp, ps.y, ps.match_duals), tag + "matching ");
    b.fractions.merge(wait_fraction_residual(hg, ps.z, d[n].fractions), tag + "wait fractions ");
    qs.push_back(ps.q_solo);
    zs.push_back(ps.z);
  }
  b.assignment.merge(ncp_residual_assignment(inst.network, assemble_demand(hg, qs, zs), s.links), "assignment ");
  for (int w = 0; w < W; ++w) {
    std::vector<double> q, u;
    for (int n = 0; n < N; ++n) {
      q.push_back(s.providers[n].q_solo[w]);
      u.push_back(d[n].u_solo[w].total());
      q.push_back(s.providers[n].q_pool[w]);
      u.push_back(d[n].u_pool[w].total());
    }
    b.choice.merge(mode_choice_residual(sc.demands[w].rate, q, u, "pair " + std::to_string(w + 1)), "mode choice ");
  }
  for (const Residual* r : {&b.dispatch, &b.matching, &b.assignment, &b.choice, &b.fractions}) b.total.merge(*r, "");
  return b;
}

Residual unified_residual(const Instance& inst, const EquilibriumState& s) { return residual_breakdown(inst, s).total; }

std::vector<Metrics> compute_metrics(const Instance& inst, const EquilibriumState& s) {
  const auto& hg = inst.graph;
  std::vector<Metrics> out;
  Metrics sum;
  if (!s.feasible) return {sum};
  for (std::size_t n = 0; n < s.providers.size(); ++n) {
    const ProviderState& ps = s.providers[n];
    Metrics m;
    for (int e = 0; e < hg.num_edges(); ++e) {
      const OdEdge& ed = hg.edges()[e];
      const int u = hg.road_node(ed.tail()), v = hg.road_node(ed.head());
      const double hours = u == v ? 0.0 : s.tables.t(u, v);
      m.tvh += hours * ps.z[e];
      if (ed.kind == EdgeKind::rebalance && u != v) m.dhm += s.tables.l(u, v) * ps.z[e];
      for (int w = 0; w < hg.num_pairs(); ++w)
        if (!ps.y.pool.empty()) m.stc += hours * ps.y.pool[w][e];
    }
    for (int w = 0; w < hg.num_pairs(); ++w)
      if (!ps.y.solo.empty()) m.stc += s.tables.t(hg.pair(w).origin, hg.pair(w).destination) * ps.y.solo[w];
    sum.dhm += m.dhm;
    sum.stc += m.stc;
    sum.tvh += m.tvh;
    out.push_back(m);
  }
  out.push_back(sum);
  return out;
}

}  // namespace ehaileq
