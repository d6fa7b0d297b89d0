#include "ehaileq/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ehaileq {

using Eigen::MatrixXd;
using Eigen::VectorXd;

IpmResult solve_lp_interior(const LinearProgram& lp, double tol, int max_iter) {
  const int n0 = lp.num_vars(), m0 = lp.num_rows();
  int slacks = 0;
  for (const auto& r : lp.rows)
    if (r.sense != RowSense::eq) ++slacks;
  const int n = n0 + slacks;
  MatrixXd A = MatrixXd::Zero(m0, n);
  VectorXd b(m0), c = VectorXd::Zero(n);
  for (int j = 0; j < n0; ++j) c(j) = lp.cost[j];
  int next = n0;
  for (int i = 0; i < m0; ++i) {
    for (const auto& [j, a] : lp.rows[i].terms) A(i, j) += a;
    b(i) = lp.rows[i].rhs;
    if (lp.rows[i].sense == RowSense::le) A(i, next++) = 1.0;
    if (lp.rows[i].sense == RowSense::ge) A(i, next++) = -1.0;
  }
  // Independent rows via pivoted QR of A'.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> keep;
  for (int i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
  std::sort(keep.begin(), keep.end());
  const int m = static_cast<int>(keep.size());
  MatrixXd Ar(m, n);
  VectorXd br(m);
  for (int i = 0; i < m; ++i) {
    Ar.row(i) = A.row(keep[i]);
    br(i) = b(keep[i]);
  }
  VectorXd x = VectorXd::Ones(n), s = VectorXd::Ones(n), y = VectorXd::Zero(m);
  {
    // Mehrotra's starting point.
    MatrixXd AAt = Ar * Ar.transpose();
    Eigen::LDLT<MatrixXd> f(AAt + 1e-12 * MatrixXd::Identity(m, m));
    x = Ar.transpose() * f.solve(br);
    y = f.solve(Ar * c);
    s = c - Ar.transpose() * y;
    double dx = std::max(-1.5 * x.minCoeff(), 0.0), ds = std::max(-1.5 * s.minCoeff(), 0.0);
    x.array() += dx;
    s.array() += ds;
    const double xs = x.dot(s);
    dx = 0.5 * xs / std::max(s.sum(), 1e-12);
    ds = 0.5 * xs / std::max(x.sum(), 1e-12);
    x.array() += dx + 1e-3;
    s.array() += ds + 1e-3;
  }
  IpmResult res;
  const double bn = 1.0 + br.norm(), cn = 1.0 + c.norm();
  auto max_step = [](const VectorXd& v, const VectorXd& dv) {
    double a = 1.0;
    for (int i = 0; i < v.size(); ++i)
      if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
    return a;
  };
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    VectorXd rp = br - Ar * x;
    VectorXd rd = c - Ar.transpose() * y - s;
    const double mu = x.dot(s) / n;
    if (rp.norm() / bn < tol && rd.norm() / cn < tol && mu < tol * tol * 1e2) {
      res.converged = true;
      break;
    }
    VectorXd d = x.cwiseQuotient(s);
    MatrixXd M = Ar * d.asDiagonal() * Ar.transpose();
    M += 1e-14 * MatrixXd::Identity(m, m);
    Eigen::LDLT<MatrixXd> f(M);
    auto direction = [&](const VectorXd& rxs, VectorXd& dx, VectorXd& dy, VectorXd& ds) {
      VectorXd sinv_rxs = rxs.cwiseQuotient(s);
      dy = f.solve(rp - Ar * sinv_rxs + Ar * d.cwiseProduct(rd));
      ds = rd - Ar.transpose() * dy;
      dx = sinv_rxs - d.cwiseProduct(ds);
    };
    VectorXd dxa, dya, dsa;
    direction(-x.cwiseProduct(s), dxa, dya, dsa);
    const double ap = max_step(x, dxa), ad = max_step(s, dsa);
    const double mu_aff = (x + ap * dxa).dot(s + ad * dsa) / n;
    const double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3);
    VectorXd rxs = -x.cwiseProduct(s) - dxa.cwiseProduct(dsa);
    rxs.array() += sigma * mu;
    VectorXd dx, dy, ds;
    direction(rxs, dx, dy, ds);
    const double sp = std::min(1.0, 0.995 * max_step(x, dx)), sd = std::min(1.0, 0.995 * max_step(s, ds));
    x += sp * dx;
    y += sd * dy;
    s += sd * ds;
  }
  res.x.assign(n0, 0.0);
  for (int j = 0; j < n0; ++j) res.x[j] = std::max(0.0, x(j));
  res.duals.assign(m0, 0.0);
  for (int i = 0; i < m; ++i) res.duals[keep[i]] = y(i);
  res.objective = 0.0;
  for (int j = 0; j < n0; ++j) res.objective += lp.cost[j] * res.x[j];
  return res;
}

namespace {

// LP assembled from named columns and rows.
struct NamedLp {
  LinearProgram lp;
  std::vector<std::string> names;
  std::map<std::string, int> index;

  int var(const std::string& name, double cost) {
    index[name] = lp.add_var(cost);
    names.push_back(name);
    return index[name];
  }
  void row(const std::string& name, const std::vector<std::pair<std::string, double>>& terms, RowSense sense,
           double rhs) {
    LpRow r;
    r.name = name;
    r.sense = sense;
    r.rhs = rhs;
    for (const auto& [v, a] : terms) r.terms.push_back({index.at(v), a});
    lp.add_row(r);
  }
};

// All-pairs free-flow times and lengths by Floyd-Warshall.
struct Apsp {
  int n;
  std::vector<double> t, l;
  double time(int u, int v) const { return t[u * n + v]; }
  double len(int u, int v) const { return l[u * n + v]; }
};

Apsp floyd(const RoadNetwork& net) {
  const int n = net.num_nodes();
  const double inf = std::numeric_limits<double>::infinity();
  Apsp a{n, std::vector<double>(n * n, inf), std::vector<double>(n * n, inf)};
  for (int i = 0; i < n; ++i) a.t[i * n + i] = a.l[i * n + i] = 0.0;
  for (const Link& k : net.links) {
    a.t[k.tail * n + k.head] = std::min(a.t[k.tail * n + k.head], k.free_flow_time);
    a.l[k.tail * n + k.head] = std::min(a.l[k.tail * n + k.head], k.length);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        a.t[i * n + j] = std::min(a.t[i * n + j], a.t[i * n + k] + a.t[k * n + j]);
        a.l[i * n + j] = std::min(a.l[i * n + j], a.l[i * n + k] + a.l[k * n + j]);
      }
  return a;
}

double violation(const LpRow& r, const std::vector<double>& x) {
  double a = 0.0;
  for (const auto& [j, v] : r.terms) a += v * x[j];
  switch (r.sense) {
    case RowSense::eq: return std::abs(a - r.rhs);
    case RowSense::ge: return std::max(0.0, r.rhs - a);
    case RowSense::le: return std::max(0.0, a - r.rhs);
  }
  return 0.0;
}

}  // namespace

OracleReport run_oracle(const Instance& inst, const OracleOptions& opt) {
  const auto& hg = inst.graph;
  const auto& sc = inst.scenario;
  if (hg.num_pairs() > 2)
    throw OracleTooLarge("too large for oracle: " + std::to_string(hg.num_pairs()) +
                         " OD pairs, the brute-force check handles at most 2");
  if (hg.num_pairs() != 2) throw OracleTooLarge("the brute-force check needs exactly 2 OD pairs");
  if (opt.provider < 0 || opt.provider >= sc.num_providers()) throw std::out_of_range("unknown provider");
  const Provider& pr = sc.providers[opt.provider];
  const Apsp sp = floyd(inst.network);
  // Node numbering of the written example: 1 = O1, 2 = O2, 3 = D1, 4 = D2.
  const int road[5] = {-1, hg.pair(0).origin, hg.pair(1).origin, hg.pair(0).destination, hg.pair(1).destination};
  auto t = [&](int a, int b) { return sp.time(road[a], road[b]); };
  double q[3], qe[3], qp[3], re[3], rp[3];
  for (int w = 1; w <= 2; ++w) {
    q[w] = sc.demands[w - 1].rate;
    qp[w] = opt.pool_share * q[w];
    qe[w] = q[w] - qp[w];
    const int o = road[w], d = road[w + 2];
    re[w] = pr.solo.fixed[w - 1] + pr.solo.alpha2 * sp.len(o, d);
    rp[w] = pr.gamma * (pr.pool.fixed[w - 1] + pr.pool.alpha2 * sp.len(o, d));
  }

  // Dispatch, row by row.
  NamedLp D;
  D.var("z1'3'", t(3, 1));
  D.var("z2'3'", t(3, 2));
  D.var("z1'4'", t(4, 1));
  D.var("z2'4'", t(4, 2));
  D.var("ze13", t(1, 3) - re[1]);
  D.var("ze24", t(2, 4) - re[2]);
  D.var("zp13", t(1, 3) - rp[1]);
  D.var("zp24", t(2, 4) - rp[2]);
  D.var("zp12", t(1, 2));
  D.var("zp21", t(2, 1));
  D.var("zp14", t(1, 4) - rp[2]);
  D.var("zp23", t(2, 3) - rp[1]);
  D.var("zp34", t(3, 4) - rp[2]);
  D.var("zp43", t(4, 3) - rp[1]);
  for (const char* v : {"z1'1p", "z2'2p", "z1'1e", "z2'2e", "z3p3'", "z4p4'", "z3e3'", "z4e4'"}) D.var(v, 0.0);
  using RS = RowSense;
  D.row("entry 1", {{"z1'1p", 1}, {"zp12", -1}}, RS::eq, 0);
  D.row("entry 2", {{"z2'2p", 1}, {"zp21", -1}}, RS::eq, 0);
  D.row("through 2", {{"zp12", 1}, {"zp23", -1}, {"zp24", -1}}, RS::eq, 0);
  D.row("through 1", {{"zp21", 1}, {"zp13", -1}, {"zp14", -1}}, RS::eq, 0);
  D.row("dest through 3", {{"zp13", 1}, {"zp23", 1}, {"zp34", -1}}, RS::eq, 0);
  D.row("dest through 4", {{"zp14", 1}, {"zp24", 1}, {"zp43", -1}}, RS::eq, 0);
  D.row("exit 4", {{"zp34", 1}, {"z4p4'", -1}}, RS::eq, 0);
  D.row("exit 3", {{"zp43", 1}, {"z3p3'", -1}}, RS::eq, 0);
  D.row("pool pickup 1", {{"z1'1p", 1}, {"zp21", 1}}, RS::ge, qp[1]);
  D.row("pool pickup 2", {{"z2'2p", 1}, {"zp12", 1}}, RS::ge, qp[2]);
  D.row("pool dropoff 1", {{"z3p3'", 1}, {"zp34", 1}}, RS::ge, qp[1]);
  D.row("pool dropoff 2", {{"z4p4'", 1}, {"zp43", 1}}, RS::ge, qp[2]);
  D.row("solo origin 1", {{"z1'1e", 1}, {"ze13", -1}}, RS::eq, 0);
  D.row("solo origin 2", {{"z2'2e", 1}, {"ze24", -1}}, RS::eq, 0);
  D.row("solo dest 3", {{"ze13", 1}, {"z3e3'", -1}}, RS::eq, 0);
  D.row("solo dest 4", {{"ze24", 1}, {"z4e4'", -1}}, RS::eq, 0);
  D.row("solo demand 1", {{"z1'1e", 1}}, RS::ge, qe[1]);
  D.row("solo demand 2", {{"z2'2e", 1}}, RS::ge, qe[2]);
  D.row("virtual 1'", {{"z1'3'", 1}, {"z1'4'", 1}, {"z1'1p", -1}, {"z1'1e", -1}}, RS::eq, 0);
  D.row("virtual 2'", {{"z2'3'", 1}, {"z2'4'", 1}, {"z2'2p", -1}, {"z2'2e", -1}}, RS::eq, 0);
  D.row("virtual 3'", {{"z3e3'", 1}, {"z3p3'", 1}, {"z1'3'", -1}, {"z2'3'", -1}}, RS::eq, 0);
  D.row("virtual 4'", {{"z4e4'", 1}, {"z4p4'", 1}, {"z1'4'", -1}, {"z2'4'", -1}}, RS::eq, 0);
  D.row("virtual balance",
        {{"z1'1p", 1}, {"z1'1e", 1}, {"z2'2p", 1}, {"z2'2e", 1}, {"z3e3'", -1}, {"z3p3'", -1}, {"z4e4'", -1},
         {"z4p4'", -1}},
        RS::eq, 0);

  // The module's view of the same instance.
  DispatchProblem dp;
  FareSchedule fares = compute_fares(hg, pr, inst.baseline, inst.baseline);
  dp.costs = compute_edge_costs(hg, inst.baseline, fares);
  dp.q_solo = {qe[1], qe[2]};
  dp.q_pool = {qp[1], qp[2]};
  dp.costs.cost[hg.edge_index(EdgeKind::solo, 0, 0)] += opt.perturb_cost;
  DispatchSolution ds = solve_dispatch(hg, dp);

  OracleReport rep;
  auto check = [&](const std::string& name, double v) {
    rep.checks.push_back({name, v});
    rep.max_diff = std::max(rep.max_diff, std::isfinite(v) ? v : std::numeric_limits<double>::infinity());
  };
  IpmResult od = solve_lp_interior(D.lp);
  check("dispatch oracle converged", od.converged ? 0.0 : 1.0);
  if (ds.status != LpStatus::optimal) {
    check("dispatch module status", std::numeric_limits<double>::infinity());
    return rep;
  }
  rep.z = ds.z;
  // Oracle column -> module edge.
  const std::map<std::string, int> to_edge = {
      {"z1'3'", hg.edge_index(EdgeKind::rebalance, 0, 0)}, {"z2'3'", hg.edge_index(EdgeKind::rebalance, 0, 1)},
      {"z1'4'", hg.edge_index(EdgeKind::rebalance, 1, 0)}, {"z2'4'", hg.edge_index(EdgeKind::rebalance, 1, 1)},
      {"ze13", hg.edge_index(EdgeKind::solo, 0, 0)},       {"ze24", hg.edge_index(EdgeKind::solo, 1, 1)},
      {"zp13", hg.edge_index(EdgeKind::od, 0, 0)},         {"zp24", hg.edge_index(EdgeKind::od, 1, 1)},
      {"zp12", hg.edge_index(EdgeKind::oo, 0, 1)},         {"zp21", hg.edge_index(EdgeKind::oo, 1, 0)},
      {"zp14", hg.edge_index(EdgeKind::od, 0, 1)},         {"zp23", hg.edge_index(EdgeKind::od, 1, 0)},
      {"zp34", hg.edge_index(EdgeKind::dd, 0, 1)},         {"zp43", hg.edge_index(EdgeKind::dd, 1, 0)},
      {"z1'1p", hg.edge_index(EdgeKind::vo_pool, 0, 0)},   {"z2'2p", hg.edge_index(EdgeKind::vo_pool, 1, 1)},
      {"z1'1e", hg.edge_index(EdgeKind::vo_solo, 0, 0)},   {"z2'2e", hg.edge_index(EdgeKind::vo_solo, 1, 1)},
      {"z3p3'", hg.edge_index(EdgeKind::vd_pool, 0, 0)},   {"z4p4'", hg.edge_index(EdgeKind::vd_pool, 1, 1)},
      {"z3e3'", hg.edge_index(EdgeKind::vd_solo, 0, 0)},   {"z4e4'", hg.edge_index(EdgeKind::vd_solo, 1, 1)}};
  std::vector<double> zm(D.names.size());
  for (std::size_t j = 0; j < D.names.size(); ++j) zm[j] = ds.z[to_edge.at(D.names[j])];
  for (const auto& r : D.lp.rows) check("dispatch row " + r.name, violation(r, zm));
  double at_module = 0.0;
  for (std::size_t j = 0; j < zm.size(); ++j) at_module += D.lp.cost[j] * zm[j];
  check("dispatch objective", std::abs(ds.objective - od.objective));
  check("dispatch objective at module flows", std::abs(at_module - od.objective));
  check("dispatch dual objective", std::abs(ds.dual_objective - od.objective));

  // Matching on the module's vehicle flows.
  auto z = [&](const char* name) { return ds.z[to_edge.at(name)]; };
  auto share = [](double part, double total) { return total > 0 ? part / total : 0.0; };
  const double bwt = sc.weights.wt.pool;
  // Rebalancing inflow shares into origins 1 and 2 from destinations 3 and 4.
  const double in1 = z("z1'3'") + z("z1'4'"), in2 = z("z2'3'") + z("z2'4'");
  const double wait_reb1 = share(z("z1'3'"), in1) * t(3, 1) + share(z("z1'4'"), in1) * t(4, 1);
  const double wait_reb2 = share(z("z2'3'"), in2) * t(3, 2) + share(z("z2'4'"), in2) * t(4, 2);
  const double o21 = z("zp21") > 0 ? 1.0 : 0.0, o12 = z("zp12") > 0 ? 1.0 : 0.0;
  double cwt[3];
  cwt[1] = bwt * (wait_reb1 + wait_reb2 + o21 * t(2, 1));
  cwt[2] = bwt * (wait_reb2 + wait_reb1 + o12 * t(1, 2));
  if (sc.pool_wait == PoolWaitRule::normalized) {
    cwt[1] = bwt * (wait_reb1 + o21 * (wait_reb2 + t(2, 1)));
    cwt[2] = bwt * (wait_reb2 + o12 * (wait_reb1 + t(1, 2)));
  }
  NamedLp M;
  M.var("y1_12", t(1, 2) + cwt[1]);
  M.var("y2_21", t(2, 1) + cwt[2]);
  M.var("y1_43", t(4, 3));
  M.var("y2_34", t(3, 4));
  M.var("y1_13", t(1, 3) + cwt[1]);
  M.var("y2_13", t(1, 3));
  M.var("y1_24", t(2, 4));
  M.var("y2_24", t(2, 4) + cwt[2]);
  M.var("y1_14", t(1, 4) + cwt[1]);
  M.var("y2_14", t(1, 4));
  M.var("y1_23", t(2, 3));
  M.var("y2_23", t(2, 3) + cwt[2]);
  M.row("pickup 1", {{"y1_12", 1}, {"y1_13", 1}, {"y1_14", 1}}, RS::eq, qp[1]);
  M.row("pickup 2", {{"y2_21", 1}, {"y2_23", 1}, {"y2_24", 1}}, RS::eq, qp[2]);
  M.row("dropoff 1", {{"y1_23", 1}, {"y1_13", 1}, {"y1_43", 1}}, RS::eq, qp[1]);
  M.row("dropoff 2", {{"y2_14", 1}, {"y2_34", 1}, {"y2_24", 1}}, RS::eq, qp[2]);
  M.row("origin conservation 1@2", {{"y1_12", 1}, {"y1_23", -1}, {"y1_24", -1}}, RS::eq, 0);
  M.row("origin conservation 2@1", {{"y2_21", 1}, {"y2_13", -1}, {"y2_14", -1}}, RS::eq, 0);
  M.row("dest conservation 1@4", {{"y1_43", 1}, {"y1_24", -1}, {"y1_14", -1}}, RS::eq, 0);
  M.row("dest conservation 2@3", {{"y2_34", 1}, {"y2_23", -1}, {"y2_13", -1}}, RS::eq, 0);
  const std::pair<const char*, const char*> caps[] = {
      {"y2_21", "zp21"}, {"y1_12", "zp12"}, {"y1_43", "zp43"}, {"y2_34", "zp34"}, {"y1_13", "zp13"}, {"y2_13", "zp13"},
      {"y1_24", "zp24"}, {"y2_24", "zp24"}, {"y1_14", "zp14"}, {"y2_14", "zp14"}, {"y1_23", "zp23"}, {"y2_23", "zp23"}};
  for (const auto& [y, zz] : caps) M.row(std::string("capacity ") + y, {{y, 1}}, RS::le, z(zz));
  IpmResult om = solve_lp_interior(M.lp);
  check("matching oracle converged", om.converged ? 0.0 : 1.0);

  MatchingProblem mp;
  mp.z = ds.z;
  mp.q_solo = dp.q_solo;
  mp.q_pool = dp.q_pool;
  mp.edge_time = dp.costs.hours;
  WaitFractions f = solve_wait_fractions(hg, ds.z);
  for (int w = 0; w < 2; ++w) mp.wait_cost.push_back(waiting_cost(hg, Mode::pool, w, f, inst.baseline, bwt, sc.pool_wait));
  MatchingSolution ms = solve_matching(hg, mp);
  if (ms.status != LpStatus::optimal) {
    check("matching module status", std::numeric_limits<double>::infinity());
    return rep;
  }
  auto y_of = [&](const std::string& name) {
    const int w = name[1] - '1';
    const int a = name[3] - '0', b = name[4] - '0';
    // a, b in the 1..4 numbering: 1,2 origins, 3,4 destinations.
    const int wa = (a - 1) % 2, wb = (b - 1) % 2;
    EdgeKind k = a <= 2 ? (b <= 2 ? EdgeKind::oo : EdgeKind::od) : EdgeKind::dd;
    return ms.y.pool[w][hg.edge_index(k, wa, wb)];
  };
  std::vector<double> ym(M.names.size());
  for (std::size_t j = 0; j < M.names.size(); ++j) ym[j] = y_of(M.names[j]);
  for (const auto& r : M.lp.rows) check("matching row " + r.name, violation(r, ym));
  double m_at = 0.0;
  for (std::size_t j = 0; j < ym.size(); ++j) m_at += M.lp.cost[j] * ym[j];
  double solo_part = 0.0;
  for (int w = 0; w < 2; ++w) solo_part += dp.costs.hours[hg.edge_index(EdgeKind::solo, w, w)] * ms.y.solo[w];
  check("matching objective", std::abs(ms.objective - solo_part - om.objective));
  check("matching objective at module flows", std::abs(m_at - om.objective));
  return rep;
}

}  // namespace ehaileq
