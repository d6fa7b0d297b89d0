#include "ehaileq/modechoice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ehaileq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void shares(const std::vector<double>& inflow, std::vector<double>& o, std::vector<double>& eta) {
  double total = 0.0;
  for (double v : inflow) total += std::max(0.0, v);
  o.assign(inflow.size(), 0.0);
  eta.assign(inflow.size(), 0.0);
  if (total <= 0.0) return;
  for (std::size_t i = 0; i < inflow.size(); ++i) o[i] = std::max(0.0, inflow[i]) / total;
}

}  // namespace

WaitFractions solve_wait_fractions(const ODHypergraph& hg, const std::vector<double>& z) {
  const int W = hg.num_pairs();
  WaitFractions f;
  f.o.assign(W, std::vector<double>(W, 0.0));
  f.eta.assign(W, std::vector<double>(W, 0.0));
  f.o_pool.assign(W, std::vector<double>(W, 0.0));
  f.eta_pool.assign(W, std::vector<double>(W, 0.0));
  for (int w = 0; w < W; ++w) {
    std::vector<double> in(W), o, eta;
    for (int v = 0; v < W; ++v) in[v] = z[hg.edge_index(EdgeKind::rebalance, v, w)];
    shares(in, o, eta);
    for (int v = 0; v < W; ++v) {
      f.o[v][w] = o[v];
      f.eta[v][w] = eta[v];
    }
    for (int k = 0; k < W; ++k) in[k] = k == w ? 0.0 : z[hg.edge_index(EdgeKind::oo, k, w)];
    shares(in, o, eta);
    for (int k = 0; k < W; ++k) {
      if (k == w) continue;
      f.o_pool[k][w] = o[k];
      f.eta_pool[k][w] = eta[k];
    }
  }
  return f;
}

Residual wait_fraction_residual(const ODHypergraph& hg, const std::vector<double>& z, const WaitFractions& f) {
  const int W = hg.num_pairs();
  Residual r;
  auto check = [&](const std::vector<double>& in, const std::vector<std::vector<double>>& o,
                   const std::vector<std::vector<double>>& eta, int w, const std::string& fam, int skip) {
    double Z = 0.0;
    for (int v = 0; v < W; ++v)
      if (v != skip) Z += in[v];
    for (int v = 0; v < W; ++v) {
      if (v == skip) continue;
      const std::string tag = fam + "[" + std::to_string(v + 1) + "," + std::to_string(w + 1) + "]";
      const double ov = o[v][w], ev = eta[v][w];
      r.update(std::abs(std::min(ov, Z * ov - in[v] + ev)), tag + " stationarity");
      r.update(std::abs(std::min(ev, 1.0 - ov)), tag + " upper bound");
      r.update(std::max({0.0, -ov, -ev, ov - 1.0}), tag + " bounds");
    }
  };
  for (int w = 0; w < W; ++w) {
    std::vector<double> in(W);
    for (int v = 0; v < W; ++v) in[v] = z[hg.edge_index(EdgeKind::rebalance, v, w)];
    check(in, f.o, f.eta, w, "o", -1);
    for (int k = 0; k < W; ++k) in[k] = k == w ? 0.0 : z[hg.edge_index(EdgeKind::oo, k, w)];
    check(in, f.o_pool, f.eta_pool, w, "o_pool", w);
  }
  return r;
}

double waiting_cost(const ODHypergraph& hg, Mode mode, int w, const WaitFractions& f, const TravelTables& t,
                    double beta, PoolWaitRule rule) {
  const int W = hg.num_pairs();
  auto own = [&](int target) {
    double s = 0.0;
    for (int v = 0; v < W; ++v)
      if (f.o[v][target] != 0.0) s += f.o[v][target] * t.t(hg.pair(v).destination, hg.pair(target).origin);
    return s;
  };
  double total = own(w);
  if (mode == Mode::pool) {
    for (int k = 0; k < W; ++k) {
      if (k == w) continue;
      const double leg = f.o_pool[k][w] * t.t(hg.pair(k).origin, hg.pair(w).origin);
      if (rule == PoolWaitRule::literal)
        total += own(k) + leg;
      else
        total += f.o_pool[k][w] * own(k) + leg;
    }
  }
  return beta * total;
}

Friction search_friction(double beta, const MatchingConstants& c, double zflow, double q, double phi) {
  Friction f;
  if (beta == 0.0) return f;
  double qp = q * phi;
  if (!(qp >= c.epsilon)) {
    qp = c.epsilon;
    f.capped = true;
  }
  const double zterm = c.alpha2 == 1.0 ? 1.0 : std::pow(std::max(0.0, zflow), (1.0 - c.alpha2) / c.alpha2);
  f.value = beta * std::pow(c.A, -1.0 / c.alpha2) * zterm * std::pow(qp, -c.alpha1 / c.alpha2);
  return f;
}

double friction_flow(const ODHypergraph& hg, Mode mode, int w, const std::vector<double>& z) {
  if (mode == Mode::solo) return z[hg.edge_index(EdgeKind::solo, w, w)];
  double s = 0.0;
  for (int k = 0; k < hg.num_pairs(); ++k)
    if (k != w) s += z[hg.edge_index(EdgeKind::oo, k, w)];
  return s;
}

double surp_pas_cost(const ODHypergraph& hg, Mode mode, int w, const MatchDuals& duals, double beta) {
  if (beta == 0.0) return 0.0;
  if (mode == Mode::solo) return beta * duals.lambda_solo[w];
  double s = 0.0;
  for (const OdPath& p : hg.enumerate_paths(w, Mode::pool))
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      const OdNode &a = p.nodes[i], &b = p.nodes[i + 1];
      EdgeKind kind = a.kind == NodeKind::pool_dest ? EdgeKind::dd
                      : b.kind == NodeKind::pool_origin ? EdgeKind::oo
                                                        : EdgeKind::od;
      s += duals.lambda[w][hg.edge_index(kind, a.w, b.w)];
    }
  return beta * s;
}

UtilityInputs::UtilityInputs()
    : fare(kNaN), waiting(kNaN), phi(kNaN), friction(kNaN), surp_pas(kNaN), time(kNaN), distance(kNaN) {}

UtilityItems modal_utility(const UtilityInputs& in, const Weights& wt) {
  const std::pair<const char*, double> parts[] = {{"fare", in.fare},         {"waiting", in.waiting},
                                                  {"phi", in.phi},           {"friction", in.friction},
                                                  {"surp_pas", in.surp_pas}, {"time", in.time},
                                                  {"distance", in.distance}};
  for (const auto& [name, v] : parts)
    if (std::isnan(v)) throw std::invalid_argument(std::string("missing utility component: ") + name);
  UtilityItems u;
  u.fare = in.fare;
  u.waiting = in.waiting;
  u.surplus = wt.surp[in.mode] * in.phi;
  u.friction = in.friction;
  u.surp_pas = in.surp_pas;
  u.od_cost = wt.in_veh * in.time;
  if (in.mode == Mode::pool) u.od_cost += wt.inc1 * in.time + wt.inc2 * in.distance;
  return u;
}

ModalSplit solve_mode_split(double q, const std::function<std::pair<double, double>(double)>& utilities,
                            double tol) {
  ModalSplit s;
  auto gap = [&](double qp) {
    auto [ue, up] = utilities(qp);
    return std::make_tuple(up - ue, ue, up);
  };
  if (q <= 0.0) {
    auto [g, ue, up] = gap(0.0);
    s.mu = std::min(ue, up);
    return s;
  }
  auto [g0, ue0, up0] = gap(0.0);
  if (g0 >= 0.0) {
    s.q_solo = q;
    s.mu = ue0;
    return s;
  }
  auto [g1, ue1, up1] = gap(q);
  if (g1 <= 0.0) {
    s.q_pool = q;
    s.mu = up1;
    return s;
  }
  double lo = 0.0, hi = q;
  while (hi - lo > tol * std::max(1.0, q) && s.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    (std::get<0>(gap(mid)) < 0.0 ? lo : hi) = mid;
    ++s.iterations;
  }
  s.q_pool = 0.5 * (lo + hi);
  s.q_solo = q - s.q_pool;
  auto [gm, uem, upm] = gap(s.q_pool);
  s.mu = std::min(uem, upm);
  return s;
}

Residual mode_choice_residual(double q_total, const std::vector<double>& q, const std::vector<double>& u,
                              const std::string& tag) {
  Residual r;
  double mu = std::numeric_limits<double>::infinity(), sum = 0.0;
  for (double v : u) mu = std::min(mu, v);
  for (std::size_t i = 0; i < q.size(); ++i) {
    sum += q[i];
    r.update(std::abs(std::min(q[i], u[i] - mu)), tag + " choice " + std::to_string(i));
  }
  r.update(std::abs(sum - q_total), tag + " demand conservation");
  return r;
}

MarketLp build_market_lp(const ODHypergraph& hg, const MarketProblem& p) {
  const int W = hg.num_pairs(), N = static_cast<int>(p.providers.size());
  MarketLp m;
  m.var_solo.assign(N, std::vector<int>(W, -1));
  m.var_pool.assign(N, std::vector<int>(W, -1));
  // Later providers' columns come first: the lexicographic tie-break minimizes
  // them first, so on equal costs demand goes to the earlier-listed provider.
  for (int n = N - 1; n >= 0; --n)
    for (int w = 0; w < W; ++w) {
      m.var_solo[n][w] = m.lp.add_var(p.providers[n].v_solo[w]);
      m.var_names.push_back("q_solo[" + std::to_string(n + 1) + "," + std::to_string(w + 1) + "]");
      m.var_pool[n][w] = m.lp.add_var(p.providers[n].v_pool[w]);
      m.var_names.push_back("q_pool[" + std::to_string(n + 1) + "," + std::to_string(w + 1) + "]");
    }
  for (int w = 0; w < W; ++w) {
    LpRow r;
    r.name = "demand_conservation[" + std::to_string(w + 1) + "]";
    r.sense = RowSense::eq;
    r.rhs = p.demand[w];
    for (int n = 0; n < N; ++n) {
      r.terms.push_back({m.var_solo[n][w], 1.0});
      r.terms.push_back({m.var_pool[n][w], 1.0});
    }
    m.conservation.push_back(m.lp.add_row(r));
  }
  for (int n = 0; n < N; ++n) {
    const auto& pr = p.providers[n];
    DemandTerms dem;
    dem.var_solo = m.var_solo[n];
    dem.var_pool = m.var_pool[n];
    m.blocks.push_back(append_dispatch_block(m.lp, m.var_names, hg, pr.edge_cost, pr.hours, pr.kappa, dem, pr.fleet,
                                             p.dest_rule, "p" + std::to_string(n + 1) + "."));
  }
  return m;
}

MarketSolution solve_market(const ODHypergraph& hg, const MarketProblem& p, bool lexicographic) {
  const int W = hg.num_pairs(), N = static_cast<int>(p.providers.size()), E = hg.num_edges();
  MarketLp m = build_market_lp(hg, p);
  LpOptions opt;
  opt.lexicographic = lexicographic;
  LpResult r = solve_lp(m.lp, opt);
  MarketSolution s;
  s.status = r.status;
  if (r.status == LpStatus::infeasible) {
    MarketProblem relaxed = p;
    for (auto& pr : relaxed.providers) pr.fleet = std::numeric_limits<double>::infinity();
    s.infeasible_family = solve_lp(build_market_lp(hg, relaxed).lp).status == LpStatus::optimal ? "fleet" : "demand";
    return s;
  }
  if (r.status != LpStatus::optimal) return s;
  s.q_solo.assign(N, std::vector<double>(W, 0.0));
  s.q_pool.assign(N, std::vector<double>(W, 0.0));
  s.mu.resize(W);
  for (int w = 0; w < W; ++w) s.mu[w] = r.duals[m.conservation[w]];
  for (int n = 0; n < N; ++n) {
    for (int w = 0; w < W; ++w) {
      s.q_solo[n][w] = r.x[m.var_solo[n][w]];
      s.q_pool[n][w] = r.x[m.var_pool[n][w]];
    }
    const DispatchRows& R = m.blocks[n];
    const double kappa = p.providers[n].kappa;
    if (kappa > 0.0) {
      s.z.emplace_back(r.x.begin() + R.var_offset, r.x.begin() + R.var_offset + E);
      s.duals.push_back(unpack_dispatch_duals(R, r.duals, 1.0 / kappa));
    } else {
      // Dispatch costs do not enter the choice; solve the fleet problem at the chosen demand.
      DispatchProblem dp;
      dp.costs.cost = p.providers[n].edge_cost;
      dp.costs.hours = p.providers[n].hours;
      dp.q_solo = s.q_solo[n];
      dp.q_pool = s.q_pool[n];
      dp.fleet = p.providers[n].fleet;
      dp.dest_rule = p.dest_rule;
      DispatchSolution ds = solve_dispatch(hg, dp, lexicographic);
      if (ds.status != LpStatus::optimal) {
        s.status = ds.status;
        s.infeasible_family = ds.infeasible_family;
        return s;
      }
      s.z.push_back(ds.z);
      s.duals.push_back(ds.duals);
    }
    std::vector<int> sup;
    for (int w = 0; w < W; ++w) {
      if (s.q_solo[n][w] > 1e-9) sup.push_back(-2 * w - 1);
      if (s.q_pool[n][w] > 1e-9) sup.push_back(-2 * w - 2);
    }
    for (int e = 0; e < E; ++e)
      if (s.z[n][e] > 1e-9) sup.push_back(e);
    s.support.push_back(sup);
  }
  return s;
}

}  // namespace ehaileq
