#include "ehaileq/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace ehaileq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tree {
  std::vector<double> dist;
  std::vector<int> via;  // link used to leave (reverse tree) or enter (forward tree) a node
};

// Shortest distances from every node to target, following out-links.
Tree reverse_tree(const RoadNetwork& net, const std::vector<std::vector<int>>& in, const std::vector<double>& cost,
                  int target) {
  Tree tr{std::vector<double>(net.num_nodes(), kInf), std::vector<int>(net.num_nodes(), -1)};
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  tr.dist[target] = 0.0;
  pq.push({0.0, target});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > tr.dist[v]) continue;
    for (int e : in[v]) {
      const int u = net.links[e].tail;
      const double nd = d + cost[e];
      if (nd < tr.dist[u]) {
        tr.dist[u] = nd;
        tr.via[u] = e;
        pq.push({nd, u});
      }
    }
  }
  return tr;
}

std::vector<int> path_from(const RoadNetwork& net, const Tree& tr, int origin, int target) {
  std::vector<int> links;
  int v = origin;
  while (v != target) {
    int e = tr.via[v];
    links.push_back(e);
    v = net.links[e].head;
  }
  return links;
}

std::vector<double> link_times(const RoadNetwork& net, const std::vector<double>& x) {
  std::vector<double> t(net.num_links());
  for (int e = 0; e < net.num_links(); ++e) t[e] = bpr_time(net.links[e], x[e]);
  return t;
}

struct OdItem {
  int origin, dest;
  double q;
};

std::vector<OdItem> od_items(const RoadNetwork& net, const AugmentedDemand& demand) {
  std::vector<OdItem> ods;
  for (const auto& [k, q] : demand.q)
    if (k.first != k.second && q > 0) ods.push_back({k.first, k.second, q});
  (void)net;
  return ods;
}

void check_connected(const RoadNetwork& net, const OdItem& od, double dist) {
  if (!std::isfinite(dist))
    throw std::runtime_error("no road path for demand pair (" + std::to_string(net.nodes[od.origin]) + "," +
                             std::to_string(net.nodes[od.dest]) + ")");
}

void finish_state(const RoadNetwork& net, const AugmentedDemand& demand, LinkState& s) {
  s.t = link_times(net, s.x);
  auto in = net.in_links();
  s.tau.clear();
  for (int d : s.destinations) s.tau.push_back(reverse_tree(net, in, s.t, d).dist);
  s.relative_gap = relative_gap(net, demand, s.x);
}

LinkState solve_paths(const RoadNetwork& net, const AugmentedDemand& demand, const UeOptions& opt) {
  auto ods = od_items(net, demand);
  auto in = net.in_links();
  LinkState s;
  s.x.assign(net.num_links(), 0.0);
  std::vector<double> t = link_times(net, s.x);
  std::vector<std::vector<PathFlow>> P(ods.size());
  for (std::size_t i = 0; i < ods.size(); ++i) {
    Tree tr = reverse_tree(net, in, t, ods[i].dest);
    check_connected(net, ods[i], tr.dist[ods[i].origin]);
    P[i].push_back({path_from(net, tr, ods[i].origin, ods[i].dest), ods[i].q});
    for (int e : P[i].back().links) s.x[e] += ods[i].q;
  }
  t = link_times(net, s.x);
  auto path_cost = [&](const PathFlow& p) {
    double c = 0.0;
    for (int e : p.links) c += t[e];
    return c;
  };
  std::vector<int> mark(net.num_links(), 0);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    for (std::size_t i = 0; i < ods.size(); ++i) {
      Tree tr = reverse_tree(net, in, t, ods[i].dest);
      std::vector<int> sp = path_from(net, tr, ods[i].origin, ods[i].dest);
      int s_idx = -1;
      for (std::size_t k = 0; k < P[i].size(); ++k)
        if (P[i][k].links == sp) s_idx = static_cast<int>(k);
      if (s_idx < 0) {
        P[i].push_back({sp, 0.0});
        s_idx = static_cast<int>(P[i].size()) - 1;
      }
      for (std::size_t k = 0; k < P[i].size(); ++k) {
        if (static_cast<int>(k) == s_idx || P[i][k].flow <= 0) continue;
        const double gap = path_cost(P[i][k]) - path_cost(P[i][s_idx]);
        if (gap <= 0) continue;
        for (int e : P[i][k].links) mark[e] += 1;
        for (int e : P[i][s_idx].links) mark[e] -= 1;
        double den = 0.0;
        for (int e : P[i][k].links)
          if (mark[e] != 0) den += bpr_derivative(net.links[e], s.x[e]);
        for (int e : P[i][s_idx].links)
          if (mark[e] != 0) den += bpr_derivative(net.links[e], s.x[e]);
        double step = den > 0 ? std::min(P[i][k].flow, gap / den) : P[i][k].flow;
        if (step >= P[i][k].flow * (1.0 - 1e-12)) step = P[i][k].flow;
        for (int e : P[i][k].links)
          if (mark[e] != 0) {
            s.x[e] -= step;
            t[e] = bpr_time(net.links[e], s.x[e]);
          }
        for (int e : P[i][s_idx].links)
          if (mark[e] != 0) {
            s.x[e] += step;
            t[e] = bpr_time(net.links[e], s.x[e]);
          }
        for (int e : P[i][k].links) mark[e] = 0;
        for (int e : P[i][s_idx].links) mark[e] = 0;
        P[i][k].flow -= step;
        P[i][s_idx].flow += step;
      }
      std::erase_if(P[i], [](const PathFlow& p) { return p.flow <= 0.0; });
    }
    // Rebuild link flows from path flows to avoid drift.
    std::fill(s.x.begin(), s.x.end(), 0.0);
    for (const auto& ps : P)
      for (const auto& p : ps)
        for (int e : p.links) s.x[e] += p.flow;
    t = link_times(net, s.x);
    double spread = 0.0;
    for (std::size_t i = 0; i < ods.size(); ++i) {
      Tree tr = reverse_tree(net, in, t, ods[i].dest);
      const double best = tr.dist[ods[i].origin];
      for (const auto& p : P[i]) spread = std::max(spread, (path_cost(p) - best) / std::max(best, 1e-300));
    }
    if (spread <= opt.gap) {
      ++it;
      break;
    }
  }
  s.iterations = it;
  std::set<int> dests;
  for (const auto& od : ods) dests.insert(od.dest);
  s.destinations.assign(dests.begin(), dests.end());
  s.xd.assign(s.destinations.size(), std::vector<double>(net.num_links(), 0.0));
  for (std::size_t i = 0; i < ods.size(); ++i) {
    const int di = static_cast<int>(std::lower_bound(s.destinations.begin(), s.destinations.end(), ods[i].dest) -
                                    s.destinations.begin());
    for (const auto& p : P[i])
      for (int e : p.links) s.xd[di][e] += p.flow;
    s.paths[{ods[i].origin, ods[i].dest}] = P[i];
  }
  finish_state(net, demand, s);
  return s;
}

LinkState solve_frank_wolfe(const RoadNetwork& net, const AugmentedDemand& demand, const UeOptions& opt) {
  auto ods = od_items(net, demand);
  auto in = net.in_links();
  LinkState s;
  std::set<int> dests;
  for (const auto& od : ods) dests.insert(od.dest);
  s.destinations.assign(dests.begin(), dests.end());
  const int D = static_cast<int>(s.destinations.size()), E = net.num_links();
  auto aon = [&](const std::vector<double>& t, double* lower_bound) {
    std::vector<std::vector<double>> y(D, std::vector<double>(E, 0.0));
    double lb = 0.0;
    for (int di = 0; di < D; ++di) {
      Tree tr = reverse_tree(net, in, t, s.destinations[di]);
      for (const auto& od : ods) {
        if (od.dest != s.destinations[di]) continue;
        check_connected(net, od, tr.dist[od.origin]);
        lb += od.q * tr.dist[od.origin];
        for (int e : path_from(net, tr, od.origin, od.dest)) y[di][e] += od.q;
      }
    }
    if (lower_bound) *lower_bound = lb;
    return y;
  };
  auto sum = [&](const std::vector<std::vector<double>>& xd) {
    std::vector<double> x(E, 0.0);
    for (const auto& v : xd)
      for (int e = 0; e < E; ++e) x[e] += v[e];
    return x;
  };
  s.xd = aon(link_times(net, std::vector<double>(E, 0.0)), nullptr);
  s.x = sum(s.xd);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    s.beckmann_trace.push_back(beckmann(net, s.x));
    auto t = link_times(net, s.x);
    double lb = 0.0;
    auto yd = aon(t, &lb);
    double tx = 0.0;
    for (int e = 0; e < E; ++e) tx += t[e] * s.x[e];
    if (tx <= 0 || (tx - lb) / tx <= opt.gap) break;
    auto y = sum(yd);
    double lo = 0.0, hi = 1.0;
    auto slope = [&](double a) {
      double g = 0.0;
      for (int e = 0; e < E; ++e) g += bpr_time(net.links[e], s.x[e] + a * (y[e] - s.x[e])) * (y[e] - s.x[e]);
      return g;
    };
    if (slope(1.0) <= 0) {
      lo = 1.0;
    } else {
      for (int k = 0; k < 60; ++k) {
        double mid = 0.5 * (lo + hi);
        (slope(mid) > 0 ? hi : lo) = mid;
      }
    }
    const double a = lo;
    if (a <= 0) break;
    for (int di = 0; di < D; ++di)
      for (int e = 0; e < E; ++e) s.xd[di][e] += a * (yd[di][e] - s.xd[di][e]);
    s.x = sum(s.xd);
  }
  s.iterations = it;
  finish_state(net, demand, s);
  return s;
}

}  // namespace

double AugmentedDemand::total() const {
  double s = 0.0;
  for (const auto& [k, v] : q) s += v;
  return s;
}

AugmentedDemand assemble_demand(const ODHypergraph& hg, const std::vector<std::vector<double>>& q_solo,
                                const std::vector<std::vector<double>>& z) {
  AugmentedDemand d;
  auto add = [&](int i, int j, double v) {
    if (v != 0.0) d.q[{i, j}] += v;
  };
  for (std::size_t n = 0; n < z.size(); ++n) {
    for (int w = 0; w < hg.num_pairs(); ++w) add(hg.pair(w).origin, hg.pair(w).destination, q_solo[n][w]);
    for (int e = 0; e < hg.num_edges(); ++e) {
      const OdEdge& ed = hg.edges()[e];
      switch (ed.kind) {
        case EdgeKind::oo:
        case EdgeKind::od:
        case EdgeKind::dd:
        case EdgeKind::rebalance:
          add(hg.road_node(ed.tail()), hg.road_node(ed.head()), z[n][e]);
          break;
        default:
          break;
      }
    }
  }
  return d;
}

LinkState solve_ue(const RoadNetwork& net, const AugmentedDemand& demand, const UeOptions& opt) {
  return opt.method == UeMethod::frank_wolfe ? solve_frank_wolfe(net, demand, opt) : solve_paths(net, demand, opt);
}

std::vector<double> times_to(const RoadNetwork& net, const std::vector<double>& link_cost, int target) {
  return reverse_tree(net, net.in_links(), link_cost, target).dist;
}

double beckmann(const RoadNetwork& net, const std::vector<double>& x) {
  double b = 0.0;
  for (int e = 0; e < net.num_links(); ++e) b += bpr_integral(net.links[e], x[e]);
  return b;
}

TravelTables od_times_and_distances(const RoadNetwork& net, const std::vector<double>& link_time,
                                    const ODHypergraph& hg) {
  std::set<int> nodes;
  for (const auto& p : hg.pairs()) {
    nodes.insert(p.origin);
    nodes.insert(p.destination);
  }
  auto in = net.in_links();
  std::vector<double> len(net.num_links());
  for (int e = 0; e < net.num_links(); ++e) len[e] = net.links[e].length;
  TravelTables tab(net.num_nodes());
  for (int v : nodes) {
    auto tt = reverse_tree(net, in, link_time, v).dist;
    auto ll = reverse_tree(net, in, len, v).dist;
    for (int u : nodes) {
      if (!std::isfinite(tt[u]))
        throw std::runtime_error("node " + std::to_string(net.nodes[u]) + " cannot reach node " +
                                 std::to_string(net.nodes[v]));
      tab.set(u, v, u == v ? 0.0 : tt[u], u == v ? 0.0 : ll[u]);
    }
  }
  return tab;
}

TravelTables free_flow_tables(const RoadNetwork& net, const ODHypergraph& hg) {
  std::vector<double> t0(net.num_links());
  for (int e = 0; e < net.num_links(); ++e) t0[e] = net.links[e].free_flow_time;
  return od_times_and_distances(net, t0, hg);
}

double relative_gap(const RoadNetwork& net, const AugmentedDemand& demand, const std::vector<double>& x) {
  auto t = link_times(net, x);
  double tx = 0.0;
  for (int e = 0; e < net.num_links(); ++e) tx += t[e] * x[e];
  if (tx <= 0) return 0.0;
  auto in = net.in_links();
  std::map<int, std::vector<double>> trees;
  double lb = 0.0;
  for (const auto& [k, q] : demand.q) {
    if (k.first == k.second || q <= 0) continue;
    auto it = trees.find(k.second);
    if (it == trees.end()) it = trees.emplace(k.second, reverse_tree(net, in, t, k.second).dist).first;
    lb += q * it->second[k.first];
  }
  return (tx - lb) / tx;
}

Residual ncp_residual_assignment(const RoadNetwork& net, const AugmentedDemand& demand, const LinkState& s) {
  Residual r;
  auto t = link_times(net, s.x);
  auto in = net.in_links();
  std::vector<double> agg(net.num_links(), 0.0);
  for (std::size_t di = 0; di < s.destinations.size(); ++di) {
    const int d = s.destinations[di];
    const std::string tag = "route[" + std::to_string(net.nodes[d]) + "]";
    auto tau = reverse_tree(net, in, t, d).dist;
    const auto& xd = s.xd[di];
    std::vector<double> bal(net.num_nodes(), 0.0);
    for (int e = 0; e < net.num_links(); ++e) {
      const auto& l = net.links[e];
      agg[e] += xd[e];
      r.update(std::max(0.0, -xd[e]), tag + " flow sign");
      if (std::isfinite(tau[l.head])) {
        const double rc = tau[l.head] + t[e] - tau[l.tail];
        r.update(std::abs(std::min(xd[e], rc)), tag + " wardrop link " + std::to_string(net.nodes[l.tail]) + "-" +
                                                    std::to_string(net.nodes[l.head]));
      }
      bal[l.tail] += xd[e];
      bal[l.head] -= xd[e];
    }
    for (int i = 0; i < net.num_nodes(); ++i) {
      if (i == d) continue;
      auto it = demand.q.find({i, d});
      const double q = it == demand.q.end() ? 0.0 : it->second;
      r.update(std::abs(bal[i] - q), tag + " conservation at " + std::to_string(net.nodes[i]));
    }
  }
  for (const auto& [k, q] : demand.q) {
    if (k.first == k.second || q == 0) continue;
    if (!std::binary_search(s.destinations.begin(), s.destinations.end(), k.second))
      r.update(std::abs(q), "route demand without flow");
  }
  for (int e = 0; e < net.num_links(); ++e) r.update(std::abs(agg[e] - s.x[e]), "aggregate link flow");
  return r;
}

}  // namespace ehaileq
