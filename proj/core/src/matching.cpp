#include "ehaileq/matching.hpp"

#include <algorithm>
#include <cmath>

namespace ehaileq {

MatchingLp build_matching_lp(const ODHypergraph& hg, const MatchingProblem& p) {
  const int W = hg.num_pairs(), E = hg.num_edges();
  MatchingLp m;
  auto& L = m.layout;
  auto& lp = m.lp;
  L.solo_var.resize(W);
  L.pool_var.assign(W, std::vector<int>(E, -1));
  auto tag = [](const std::string& base, int w) { return base + "[" + std::to_string(w + 1) + "]"; };
  for (int w = 0; w < W; ++w) {
    const int e = hg.edge_index(EdgeKind::solo, w, w);
    L.solo_var[w] = lp.add_var(p.edge_time[e]);
    m.var_names.push_back(tag("y_solo", w));
  }
  for (int w = 0; w < W; ++w)
    for (int e : hg.passenger_edges(w)) {
      const OdEdge& ed = hg.edges()[e];
      const bool leaves_own_origin = (ed.kind == EdgeKind::oo || ed.kind == EdgeKind::od) && ed.w == w;
      double c = p.edge_time[e] + (leaves_own_origin && !p.wait_cost.empty() ? p.wait_cost[w] : 0.0);
      L.pool_var[w][e] = lp.add_var(c);
      m.var_names.push_back(tag("y", w) + edge_label(ed));
    }
  auto y = [&](int w, EdgeKind k, int a, int b) { return L.pool_var[w][hg.edge_index(k, a, b)]; };
  L.solo_demand.resize(W);
  L.solo_cap.resize(W);
  L.origin_demand.resize(W);
  L.dest_demand.resize(W);
  L.origin_cons.assign(W, std::vector<int>(W, -1));
  L.dest_cons.assign(W, std::vector<int>(W, -1));
  L.cap.assign(W, std::vector<int>(E, -1));
  for (int w = 0; w < W; ++w) {
    LpRow r;
    r.name = tag("solo_demand", w);
    r.sense = RowSense::eq;
    r.rhs = p.q_solo[w];
    r.terms = {{L.solo_var[w], 1.0}};
    L.solo_demand[w] = lp.add_row(r);

    r = LpRow{};
    r.name = tag("origin_demand", w);
    r.sense = RowSense::eq;
    r.rhs = p.q_pool[w];
    r.terms.push_back({y(w, EdgeKind::od, w, w), 1.0});
    for (int k = 0; k < W; ++k) {
      if (k == w) continue;
      r.terms.push_back({y(w, EdgeKind::oo, w, k), 1.0});
      r.terms.push_back({y(w, EdgeKind::od, w, k), 1.0});
    }
    L.origin_demand[w] = lp.add_row(r);

    r = LpRow{};
    r.name = tag("dest_demand", w);
    r.sense = RowSense::eq;
    r.rhs = p.q_pool[w];
    r.terms.push_back({y(w, EdgeKind::od, w, w), 1.0});
    for (int k = 0; k < W; ++k) {
      if (k == w) continue;
      r.terms.push_back({y(w, EdgeKind::od, k, w), 1.0});
      r.terms.push_back({y(w, EdgeKind::dd, k, w), 1.0});
    }
    L.dest_demand[w] = lp.add_row(r);

    for (int k = 0; k < W; ++k) {
      if (k == w) continue;
      r = LpRow{};
      r.name = tag("origin_conservation", w) + "@O" + std::to_string(k + 1);
      r.sense = RowSense::eq;
      r.terms = {{y(w, EdgeKind::oo, w, k), 1.0}, {y(w, EdgeKind::od, k, w), -1.0}, {y(w, EdgeKind::od, k, k), -1.0}};
      L.origin_cons[w][k] = lp.add_row(r);

      r = LpRow{};
      r.name = tag("dest_conservation", w) + "@D" + std::to_string(k + 1);
      r.sense = RowSense::eq;
      r.terms = {{y(w, EdgeKind::dd, k, w), 1.0}, {y(w, EdgeKind::od, w, k), -1.0}, {y(w, EdgeKind::od, k, k), -1.0}};
      L.dest_cons[w][k] = lp.add_row(r);
    }
  }
  for (int w = 0; w < W; ++w) {
    const int e = hg.edge_index(EdgeKind::solo, w, w);
    LpRow r;
    r.name = tag("solo_capacity", w);
    r.sense = RowSense::le;
    r.rhs = p.z[e];
    r.terms = {{L.solo_var[w], 1.0}};
    L.solo_cap[w] = lp.add_row(r);
  }
  for (int w = 0; w < W; ++w)
    for (int e : hg.passenger_edges(w)) {
      LpRow r;
      r.name = tag("capacity", w) + edge_label(hg.edges()[e]);
      r.sense = RowSense::le;
      r.rhs = p.z[e];
      r.terms = {{L.pool_var[w][e], 1.0}};
      L.cap[w][e] = lp.add_row(r);
    }
  return m;
}

namespace {

PassengerFlows unpack_primal(const ODHypergraph& hg, const MatchingLayout& L, const std::vector<double>& x) {
  const int W = hg.num_pairs(), E = hg.num_edges();
  PassengerFlows y;
  y.solo.resize(W);
  y.pool.assign(W, std::vector<double>(E, 0.0));
  for (int w = 0; w < W; ++w) {
    y.solo[w] = x[L.solo_var[w]];
    for (int e = 0; e < E; ++e)
      if (L.pool_var[w][e] >= 0) y.pool[w][e] = x[L.pool_var[w][e]];
  }
  return y;
}

MatchDuals unpack_duals(const ODHypergraph& hg, const MatchingLayout& L, const std::vector<double>& v) {
  const int W = hg.num_pairs(), E = hg.num_edges();
  MatchDuals d;
  d.phi_plus.resize(W);
  d.phi_minus.resize(W);
  d.phi_solo.resize(W);
  d.lambda_solo.resize(W);
  d.pi_origin.assign(W, std::vector<double>(W, 0.0));
  d.pi_dest.assign(W, std::vector<double>(W, 0.0));
  d.lambda.assign(W, std::vector<double>(E, 0.0));
  for (int w = 0; w < W; ++w) {
    d.phi_plus[w] = v[L.origin_demand[w]];
    d.phi_minus[w] = v[L.dest_demand[w]];
    d.phi_solo[w] = v[L.solo_demand[w]];
    d.lambda_solo[w] = -v[L.solo_cap[w]];
    for (int k = 0; k < W; ++k) {
      if (L.origin_cons[w][k] >= 0) d.pi_origin[w][k] = v[L.origin_cons[w][k]];
      if (L.dest_cons[w][k] >= 0) d.pi_dest[w][k] = v[L.dest_cons[w][k]];
    }
    for (int e = 0; e < E; ++e)
      if (L.cap[w][e] >= 0) d.lambda[w][e] = -v[L.cap[w][e]];
  }
  return d;
}

}  // namespace

std::vector<double> pack_matching_primal(const MatchingLayout& L, const PassengerFlows& y, int n) {
  std::vector<double> x(n, 0.0);
  for (std::size_t w = 0; w < L.solo_var.size(); ++w) {
    x[L.solo_var[w]] = y.solo[w];
    for (std::size_t e = 0; e < L.pool_var[w].size(); ++e)
      if (L.pool_var[w][e] >= 0) x[L.pool_var[w][e]] = y.pool[w][e];
  }
  return x;
}

std::vector<double> pack_matching_duals(const MatchingLayout& L, const MatchDuals& d, int m) {
  std::vector<double> v(m, 0.0);
  for (std::size_t w = 0; w < L.solo_var.size(); ++w) {
    v[L.origin_demand[w]] = d.phi_plus[w];
    v[L.dest_demand[w]] = d.phi_minus[w];
    v[L.solo_demand[w]] = d.phi_solo[w];
    v[L.solo_cap[w]] = -d.lambda_solo[w];
    for (std::size_t k = 0; k < L.origin_cons[w].size(); ++k) {
      if (L.origin_cons[w][k] >= 0) v[L.origin_cons[w][k]] = d.pi_origin[w][k];
      if (L.dest_cons[w][k] >= 0) v[L.dest_cons[w][k]] = d.pi_dest[w][k];
    }
    for (std::size_t e = 0; e < L.cap[w].size(); ++e)
      if (L.cap[w][e] >= 0) v[L.cap[w][e]] = -d.lambda[w][e];
  }
  return v;
}

MatchingSolution solve_matching(const ODHypergraph& hg, const MatchingProblem& p, bool lexicographic) {
  MatchingLp m = build_matching_lp(hg, p);
  LpOptions opt;
  opt.lexicographic = lexicographic;
  LpResult r = solve_lp(m.lp, opt);
  MatchingSolution s;
  s.status = r.status;
  if (r.status != LpStatus::optimal) return s;
  s.y = unpack_primal(hg, m.layout, r.x);
  s.duals = unpack_duals(hg, m.layout, r.duals);
  s.objective = r.objective;
  s.dual_objective = r.dual_objective;
  return s;
}

Residual ncp_residual_matching(const ODHypergraph& hg, const MatchingProblem& p, const PassengerFlows& y,
                               const MatchDuals& duals) {
  MatchingLp m = build_matching_lp(hg, p);
  return kkt_residual(m.lp, pack_matching_primal(m.layout, y, m.lp.num_vars()),
                      pack_matching_duals(m.layout, duals, m.lp.num_rows()), m.var_names);
}

std::vector<PassengerSurplusEntry> passenger_surplus(const ODHypergraph& hg, const PassengerFlows& y,
                                                     const std::vector<double>& z, const MatchDuals& duals) {
  std::vector<PassengerSurplusEntry> out;
  for (int w = 0; w < hg.num_pairs(); ++w)
    for (int e : hg.passenger_edges(w)) {
      PassengerSurplusEntry s;
      s.w = w;
      s.edge = e;
      s.y = y.pool[w][e];
      s.z = z[e];
      s.oversupply = s.z - s.y > 1e-9 * std::max(1.0, s.z);
      s.lambda = s.oversupply ? 0.0 : duals.lambda[w][e];
      out.push_back(s);
    }
  return out;
}

double max_summed_occupancy(const ODHypergraph& hg, const PassengerFlows& y, const std::vector<double>& z) {
  double worst = 0.0;
  for (int e = 0; e < hg.num_edges(); ++e) {
    if (z[e] <= 1e-12) continue;
    double s = 0.0;
    for (int w = 0; w < hg.num_pairs(); ++w) s += y.pool[w][e];
    worst = std::max(worst, s / z[e]);
  }
  return worst;
}

}  // namespace ehaileq
