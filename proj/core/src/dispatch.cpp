#include "ehaileq/dispatch.hpp"

#include <algorithm>
#include <cmath>

namespace ehaileq {

FareSchedule compute_fares(const ODHypergraph& hg, const Provider& pr, const TravelTables& t,
                           const TravelTables& baseline) {
  const int W = hg.num_pairs();
  FareSchedule f;
  f.gamma = pr.gamma;
  f.base_solo.resize(W);
  f.base_pool.resize(W);
  f.solo.resize(W);
  f.pool.resize(W);
  f.baseline.resize(W);
  for (int w = 0; w < W; ++w) {
    const auto& p = hg.pair(w);
    const double tt = t.t(p.origin, p.destination);
    const double tb = baseline.t(p.origin, p.destination);
    const double l = t.l(p.origin, p.destination);
    f.baseline[w] = tb;
    f.base_solo[w] = pr.solo.fixed[w] + pr.solo.alpha1 * (tt - tb) + pr.solo.alpha2 * l;
    f.base_pool[w] = pr.pool.fixed[w] + pr.pool.alpha1 * (tt - tb) + pr.pool.alpha2 * l;
    f.solo[w] = f.base_solo[w];
    f.pool[w] = pr.gamma * f.base_pool[w];
  }
  return f;
}

EdgeCostTable compute_edge_costs(const ODHypergraph& hg, const TravelTables& t, const FareSchedule& fares) {
  EdgeCostTable c;
  c.cost.resize(hg.num_edges());
  c.hours.resize(hg.num_edges());
  for (int e = 0; e < hg.num_edges(); ++e) {
    const OdEdge& ed = hg.edges()[e];
    const int u = hg.road_node(ed.tail()), v = hg.road_node(ed.head());
    double hours = 0.0, fare = 0.0;
    switch (ed.kind) {
      case EdgeKind::solo:
        hours = t.t(u, v);
        fare = fares.solo[ed.w];
        break;
      case EdgeKind::oo:
      case EdgeKind::rebalance:
        hours = t.t(u, v);
        break;
      case EdgeKind::od:
      case EdgeKind::dd:
        hours = t.t(u, v);
        fare = fares.pool[ed.k];
        break;
      default:
        break;
    }
    c.hours[e] = hours;
    c.cost[e] = hours - fare;
  }
  return c;
}

std::vector<double> effective_edge_costs(const ODHypergraph& hg, const DispatchProblem& p) {
  std::vector<double> c = p.costs.cost;
  if (p.search_cost.empty()) return c;
  for (int e = 0; e < hg.num_edges(); ++e) {
    const OdEdge& ed = hg.edges()[e];
    if (ed.kind == EdgeKind::oo || ed.kind == EdgeKind::od) c[e] += p.search_cost[ed.w];
  }
  return c;
}

DispatchRows append_dispatch_block(LinearProgram& lp, std::vector<std::string>& names, const ODHypergraph& hg,
                                   const std::vector<double>& edge_cost, const std::vector<double>& hours,
                                   double scale, const DemandTerms& dem, double fleet, DestDemandRule rule,
                                   const std::string& prefix) {
  const int W = hg.num_pairs();
  DispatchRows R;
  R.var_offset = lp.num_vars();
  for (int e = 0; e < hg.num_edges(); ++e) {
    lp.add_var(scale * edge_cost[e]);
    names.push_back(prefix + edge_label(hg.edges()[e]));
  }
  auto var = [&](EdgeKind k, int w, int v) { return R.var_offset + hg.edge_index(k, w, v); };
  auto row = [&](const std::string& name, RowSense s, double rhs) {
    LpRow r;
    r.name = prefix + name;
    r.sense = s;
    r.rhs = rhs;
    return r;
  };
  auto tag = [](const char* base, int w) { return std::string(base) + "[" + std::to_string(w + 1) + "]"; };
  R.pool_origin_entry.resize(W);
  R.pool_origin_through.resize(W);
  R.pool_dest_through.resize(W);
  R.pool_dest_exit.resize(W);
  R.solo_origin.resize(W);
  R.solo_dest.resize(W);
  R.virtual_origin.resize(W);
  R.virtual_dest.resize(W);
  R.solo_demand.resize(W);
  R.pool_origin_demand.resize(W);
  R.pool_dest_demand.resize(W);
  for (int w = 0; w < W; ++w) {
    LpRow r = row(tag("pool_origin_entry", w), RowSense::eq, 0.0);
    r.terms.push_back({var(EdgeKind::vo_pool, w, w), 1.0});
    for (int k = 0; k < W; ++k)
      if (k != w) r.terms.push_back({var(EdgeKind::oo, w, k), -1.0});
    R.pool_origin_entry[w] = lp.add_row(r);

    r = row(tag("pool_origin_through", w), RowSense::eq, 0.0);
    for (int k = 0; k < W; ++k)
      if (k != w) r.terms.push_back({var(EdgeKind::oo, k, w), 1.0});
    for (int k = 0; k < W; ++k) r.terms.push_back({var(EdgeKind::od, w, k), -1.0});
    R.pool_origin_through[w] = lp.add_row(r);

    r = row(tag("pool_dest_through", w), RowSense::eq, 0.0);
    for (int k = 0; k < W; ++k) r.terms.push_back({var(EdgeKind::od, k, w), 1.0});
    for (int k = 0; k < W; ++k)
      if (k != w) r.terms.push_back({var(EdgeKind::dd, w, k), -1.0});
    R.pool_dest_through[w] = lp.add_row(r);

    r = row(tag("pool_dest_exit", w), RowSense::eq, 0.0);
    for (int k = 0; k < W; ++k)
      if (k != w) r.terms.push_back({var(EdgeKind::dd, k, w), 1.0});
    r.terms.push_back({var(EdgeKind::vd_pool, w, w), -1.0});
    R.pool_dest_exit[w] = lp.add_row(r);

    r = row(tag("solo_origin", w), RowSense::eq, 0.0);
    r.terms = {{var(EdgeKind::vo_solo, w, w), 1.0}, {var(EdgeKind::solo, w, w), -1.0}};
    R.solo_origin[w] = lp.add_row(r);

    r = row(tag("solo_dest", w), RowSense::eq, 0.0);
    r.terms = {{var(EdgeKind::solo, w, w), 1.0}, {var(EdgeKind::vd_solo, w, w), -1.0}};
    R.solo_dest[w] = lp.add_row(r);

    r = row(tag("virtual_origin", w), RowSense::eq, 0.0);
    for (int v = 0; v < W; ++v) r.terms.push_back({var(EdgeKind::rebalance, v, w), 1.0});
    r.terms.push_back({var(EdgeKind::vo_solo, w, w), -1.0});
    r.terms.push_back({var(EdgeKind::vo_pool, w, w), -1.0});
    R.virtual_origin[w] = lp.add_row(r);

    r = row(tag("virtual_dest", w), RowSense::eq, 0.0);
    r.terms.push_back({var(EdgeKind::vd_solo, w, w), 1.0});
    r.terms.push_back({var(EdgeKind::vd_pool, w, w), 1.0});
    for (int u = 0; u < W; ++u) r.terms.push_back({var(EdgeKind::rebalance, w, u), -1.0});
    R.virtual_dest[w] = lp.add_row(r);
  }
  {
    LpRow r = row("virtual_balance", RowSense::eq, 0.0);
    for (int w = 0; w < W; ++w) {
      r.terms.push_back({var(EdgeKind::vo_solo, w, w), 1.0});
      r.terms.push_back({var(EdgeKind::vo_pool, w, w), 1.0});
      r.terms.push_back({var(EdgeKind::vd_solo, w, w), -1.0});
      r.terms.push_back({var(EdgeKind::vd_pool, w, w), -1.0});
    }
    R.virtual_balance = lp.add_row(r);
  }
  const double dest_factor = rule == DestDemandRule::half ? 0.5 : 1.0;
  auto demand_row = [&](LpRow r, const std::vector<double>& q, const std::vector<int>& qv, int w, double factor) {
    if (!qv.empty() && qv[w] >= 0) {
      r.terms.push_back({qv[w], -factor});
      r.rhs = 0.0;
    } else {
      r.rhs = factor * q[w];
    }
    return lp.add_row(r);
  };
  for (int w = 0; w < W; ++w) {
    LpRow r = row(tag("solo_demand", w), RowSense::ge, 0.0);
    r.terms.push_back({var(EdgeKind::solo, w, w), 1.0});
    R.solo_demand[w] = demand_row(r, dem.q_solo, dem.var_solo, w, 1.0);

    r = row(tag("pool_origin_demand", w), RowSense::ge, 0.0);
    r.terms.push_back({var(EdgeKind::vo_pool, w, w), 1.0});
    for (int k = 0; k < W; ++k)
      if (k != w) r.terms.push_back({var(EdgeKind::oo, k, w), 1.0});
    R.pool_origin_demand[w] = demand_row(r, dem.q_pool, dem.var_pool, w, 1.0);

    r = row(tag("pool_dest_demand", w), RowSense::ge, 0.0);
    r.terms.push_back({var(EdgeKind::vd_pool, w, w), 1.0});
    for (int k = 0; k < W; ++k)
      if (k != w) r.terms.push_back({var(EdgeKind::dd, w, k), 1.0});
    R.pool_dest_demand[w] = demand_row(r, dem.q_pool, dem.var_pool, w, dest_factor);
  }
  if (std::isfinite(fleet)) {
    LpRow r = row("fleet", RowSense::le, fleet);
    for (int e = 0; e < hg.num_edges(); ++e)
      if (hours[e] != 0.0) r.terms.push_back({R.var_offset + e, hours[e]});
    R.fleet = lp.add_row(r);
  }
  return R;
}

DispatchLp build_dispatch_lp(const ODHypergraph& hg, const DispatchProblem& p) {
  DispatchLp out;
  DemandTerms dem{p.q_solo, p.q_pool, {}, {}};
  out.rows = append_dispatch_block(out.lp, out.var_names, hg, effective_edge_costs(hg, p), p.costs.hours, 1.0, dem,
                                   p.fleet, p.dest_rule, "");
  return out;
}

DispatchDuals unpack_dispatch_duals(const DispatchRows& R, const std::vector<double>& y, double scale) {
  DispatchDuals d;
  auto take = [&](const std::vector<int>& rows) {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = y[rows[i]] * scale;
    return v;
  };
  d.pool_origin_entry = take(R.pool_origin_entry);
  d.pool_origin_through = take(R.pool_origin_through);
  d.pool_dest_through = take(R.pool_dest_through);
  d.pool_dest_exit = take(R.pool_dest_exit);
  d.solo_origin = take(R.solo_origin);
  d.solo_dest = take(R.solo_dest);
  d.virtual_origin = take(R.virtual_origin);
  d.virtual_dest = take(R.virtual_dest);
  d.phi_solo = take(R.solo_demand);
  d.phi_pool_origin = take(R.pool_origin_demand);
  d.phi_pool_dest = take(R.pool_dest_demand);
  d.virtual_balance = y[R.virtual_balance] * scale;
  d.lambda_fleet = R.fleet >= 0 ? -y[R.fleet] * scale : 0.0;
  return d;
}

std::vector<double> pack_dispatch_duals(const DispatchRows& R, const DispatchDuals& d, int num_rows) {
  std::vector<double> y(num_rows, 0.0);
  auto put = [&](const std::vector<int>& rows, const std::vector<double>& v) {
    for (std::size_t i = 0; i < rows.size(); ++i) y[rows[i]] = v[i];
  };
  put(R.pool_origin_entry, d.pool_origin_entry);
  put(R.pool_origin_through, d.pool_origin_through);
  put(R.pool_dest_through, d.pool_dest_through);
  put(R.pool_dest_exit, d.pool_dest_exit);
  put(R.solo_origin, d.solo_origin);
  put(R.solo_dest, d.solo_dest);
  put(R.virtual_origin, d.virtual_origin);
  put(R.virtual_dest, d.virtual_dest);
  put(R.solo_demand, d.phi_solo);
  put(R.pool_origin_demand, d.phi_pool_origin);
  put(R.pool_dest_demand, d.phi_pool_dest);
  y[R.virtual_balance] = d.virtual_balance;
  if (R.fleet >= 0) y[R.fleet] = -d.lambda_fleet;
  return y;
}

DispatchSolution solve_dispatch(const ODHypergraph& hg, const DispatchProblem& p, bool lexicographic) {
  DispatchLp m = build_dispatch_lp(hg, p);
  LpOptions opt;
  opt.lexicographic = lexicographic;
  LpResult r = solve_lp(m.lp, opt);
  DispatchSolution s;
  s.status = r.status;
  if (r.status == LpStatus::infeasible) {
    DispatchProblem relaxed = p;
    relaxed.fleet = std::numeric_limits<double>::infinity();
    LpResult r2 = solve_lp(build_dispatch_lp(hg, relaxed).lp);
    s.infeasible_family = r2.status == LpStatus::optimal ? "fleet" : "demand";
    return s;
  }
  if (r.status != LpStatus::optimal) return s;
  s.z = r.x;
  s.duals = unpack_dispatch_duals(m.rows, r.duals);
  s.objective = r.objective;
  s.dual_objective = r.dual_objective;
  return s;
}

Residual ncp_residual_dispatch(const ODHypergraph& hg, const DispatchProblem& p, const std::vector<double>& z,
                               const DispatchDuals& duals) {
  DispatchLp m = build_dispatch_lp(hg, p);
  return kkt_residual(m.lp, z, pack_dispatch_duals(m.rows, duals, m.lp.num_rows()), m.var_names);
}

std::vector<SurplusEntry> surplus_report(const ODHypergraph& hg, const DispatchProblem& p,
                                         const std::vector<double>& z, const DispatchDuals& duals) {
  DispatchLp m = build_dispatch_lp(hg, p);
  auto act = row_activity(m.lp, z);
  std::vector<SurplusEntry> out;
  auto tol = [](double q) { return 1e-9 * std::max(1.0, std::abs(q)); };
  for (int w = 0; w < hg.num_pairs(); ++w) {
    auto add = [&](const char* name, int row, double phi) {
      SurplusEntry e;
      e.row = name;
      e.w = w;
      e.supply = act[row];
      e.demand = m.lp.rows[row].rhs;
      e.phi = e.supply - e.demand > tol(e.demand) ? 0.0 : phi;
      e.waiting = e.supply - e.demand <= tol(e.demand);
      out.push_back(e);
    };
    add("solo", m.rows.solo_demand[w], duals.phi_solo[w]);
    add("pool_origin", m.rows.pool_origin_demand[w], duals.phi_pool_origin[w]);
    add("pool_dest", m.rows.pool_dest_demand[w], duals.phi_pool_dest[w]);
  }
  if (m.rows.fleet >= 0) {
    SurplusEntry e;
    e.row = "fleet";
    e.supply = p.fleet;
    e.demand = act[m.rows.fleet];
    e.waiting = e.supply - e.demand <= tol(e.supply);
    e.phi = e.waiting ? duals.lambda_fleet : 0.0;
    out.push_back(e);
  }
  return out;
}

double fleet_hours(const EdgeCostTable& c, const std::vector<double>& z) {
  double h = 0.0;
  for (std::size_t e = 0; e < z.size(); ++e) h += c.hours[e] * z[e];
  return h;
}

}  // namespace ehaileq
