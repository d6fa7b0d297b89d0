#include "ehaileq/odgraph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "ehaileq/network.hpp"

namespace ehaileq {

namespace {
constexpr int kEdgeKinds = 9;
}

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::solo: return "solo";
    case EdgeKind::oo: return "oo";
    case EdgeKind::od: return "od";
    case EdgeKind::dd: return "dd";
    case EdgeKind::vo_solo: return "vo_solo";
    case EdgeKind::vo_pool: return "vo_pool";
    case EdgeKind::vd_solo: return "vd_solo";
    case EdgeKind::vd_pool: return "vd_pool";
    case EdgeKind::rebalance: return "rebalance";
  }
  return "?";
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::solo_origin: return "O_e";
    case NodeKind::solo_dest: return "D_e";
    case NodeKind::pool_origin: return "O_p";
    case NodeKind::pool_dest: return "D_p";
    case NodeKind::virtual_origin: return "O'";
    case NodeKind::virtual_dest: return "D'";
  }
  return "?";
}

OdNode OdEdge::tail() const {
  switch (kind) {
    case EdgeKind::solo: return {NodeKind::solo_origin, w};
    case EdgeKind::oo:
    case EdgeKind::od: return {NodeKind::pool_origin, w};
    case EdgeKind::dd: return {NodeKind::pool_dest, w};
    case EdgeKind::vo_solo:
    case EdgeKind::vo_pool: return {NodeKind::virtual_origin, w};
    case EdgeKind::vd_solo: return {NodeKind::solo_dest, w};
    case EdgeKind::vd_pool: return {NodeKind::pool_dest, w};
    case EdgeKind::rebalance: return {NodeKind::virtual_dest, w};
  }
  return {NodeKind::solo_origin, w};
}

OdNode OdEdge::head() const {
  switch (kind) {
    case EdgeKind::solo: return {NodeKind::solo_dest, w};
    case EdgeKind::oo: return {NodeKind::pool_origin, k};
    case EdgeKind::od:
    case EdgeKind::dd: return {NodeKind::pool_dest, k};
    case EdgeKind::vo_solo: return {NodeKind::solo_origin, w};
    case EdgeKind::vo_pool: return {NodeKind::pool_origin, w};
    case EdgeKind::vd_solo:
    case EdgeKind::vd_pool: return {NodeKind::virtual_dest, w};
    case EdgeKind::rebalance: return {NodeKind::virtual_origin, k};
  }
  return {NodeKind::solo_dest, w};
}

ODHypergraph::ODHypergraph(std::vector<OdPairRef> pairs, int num_providers)
    : pairs_(std::move(pairs)), providers_(num_providers) {
  const int W = num_pairs();
  lookup_.assign(kEdgeKinds * W * W, -1);
  auto add = [&](EdgeKind kind, int w, int k) {
    lookup_[static_cast<int>(kind) * W * W + w * W + k] = static_cast<int>(edges_.size());
    edges_.push_back({kind, w, k});
  };
  for (int w = 0; w < W; ++w) {
    add(EdgeKind::solo, w, w);
    for (int k = 0; k < W; ++k)
      if (k != w) add(EdgeKind::oo, w, k);
    for (int k = 0; k < W; ++k) add(EdgeKind::od, w, k);
    for (int k = 0; k < W; ++k)
      if (k != w) add(EdgeKind::dd, w, k);
  }
  for (int w = 0; w < W; ++w) {
    add(EdgeKind::vo_solo, w, w);
    add(EdgeKind::vo_pool, w, w);
    add(EdgeKind::vd_solo, w, w);
    add(EdgeKind::vd_pool, w, w);
  }
  for (int w = 0; w < W; ++w)
    for (int k = 0; k < W; ++k) add(EdgeKind::rebalance, w, k);
}

int ODHypergraph::edge_index(EdgeKind kind, int w, int k) const {
  const int W = num_pairs();
  if (w < 0 || k < 0 || w >= W || k >= W) return -1;
  return lookup_[static_cast<int>(kind) * W * W + w * W + k];
}

std::vector<int> ODHypergraph::edges_of(EdgeKind kind) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e)
    if (edges_[e].kind == kind) out.push_back(e);
  return out;
}

int ODHypergraph::count_pool_edges() const {
  return static_cast<int>(edges_of(EdgeKind::oo).size() + edges_of(EdgeKind::od).size() +
                          edges_of(EdgeKind::dd).size());
}

std::vector<OdNode> ODHypergraph::nodes() const {
  std::vector<OdNode> out;
  for (NodeKind k : {NodeKind::solo_origin, NodeKind::solo_dest, NodeKind::pool_origin, NodeKind::pool_dest,
                     NodeKind::virtual_origin, NodeKind::virtual_dest})
    for (int w = 0; w < num_pairs(); ++w) out.push_back({k, w});
  return out;
}

std::vector<int> ODHypergraph::out_edges(const OdNode& n) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e)
    if (edges_[e].tail() == n) out.push_back(e);
  return out;
}

std::vector<int> ODHypergraph::in_edges(const OdNode& n) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e)
    if (edges_[e].head() == n) out.push_back(e);
  return out;
}

int ODHypergraph::road_node(const OdNode& n) const {
  switch (n.kind) {
    case NodeKind::solo_origin:
    case NodeKind::pool_origin:
    case NodeKind::virtual_origin: return pairs_[n.w].origin;
    default: return pairs_[n.w].destination;
  }
}

std::vector<OdPath> ODHypergraph::enumerate_paths(int w, Mode mode) const {
  if (w < 0 || w >= num_pairs()) throw std::out_of_range("unknown OD pair " + std::to_string(w));
  std::vector<OdPath> paths;
  if (mode == Mode::solo) {
    paths.push_back({w, mode, {{NodeKind::solo_origin, w}, {NodeKind::solo_dest, w}}});
    return paths;
  }
  const OdNode ow{NodeKind::pool_origin, w}, dw{NodeKind::pool_dest, w};
  paths.push_back({w, mode, {ow, dw}});
  for (int k = 0; k < num_pairs(); ++k) {
    if (k == w) continue;
    const OdNode ok{NodeKind::pool_origin, k}, dk{NodeKind::pool_dest, k};
    paths.push_back({w, mode, {ow, ok, dw}});      // O_w O_k D_w D_k
    paths.push_back({w, mode, {ow, ok, dk, dw}});  // O_w O_k D_k D_w
    paths.push_back({w, mode, {ow, dk, dw}});      // O_k O_w D_k D_w
  }
  return paths;
}

std::vector<PooledSequence> ODHypergraph::pooled_sequences() const {
  std::vector<PooledSequence> out;
  for (int w = 0; w < num_pairs(); ++w)
    for (int k = 0; k < num_pairs(); ++k) {
      if (k == w) continue;
      const OdNode ow{NodeKind::pool_origin, w}, dw{NodeKind::pool_dest, w};
      const OdNode ok{NodeKind::pool_origin, k}, dk{NodeKind::pool_dest, k};
      const std::string a = std::to_string(w + 1), b = std::to_string(k + 1);
      out.push_back({w, k, {ow, ok, dw, dk}, "O" + a + "-O" + b + "-D" + a + "-D" + b});
      out.push_back({w, k, {ow, ok, dk, dw}, "O" + a + "-O" + b + "-D" + b + "-D" + a});
      out.push_back({w, k, {ow, dw, ok, dk}, "O" + a + "-D" + a + ", O" + b + "-D" + b});
    }
  return out;
}

std::vector<int> ODHypergraph::passenger_edges(int w) const {
  std::vector<int> out;
  out.push_back(edge_index(EdgeKind::od, w, w));
  for (int k = 0; k < num_pairs(); ++k) {
    if (k == w) continue;
    out.push_back(edge_index(EdgeKind::oo, w, k));
    out.push_back(edge_index(EdgeKind::od, w, k));
    out.push_back(edge_index(EdgeKind::od, k, w));
    out.push_back(edge_index(EdgeKind::od, k, k));
    out.push_back(edge_index(EdgeKind::dd, k, w));
  }
  return out;
}

Incidence ODHypergraph::incidence(int u, int v, int w, int k) const {
  const auto& pw = pairs_[w];
  const auto& pk = pairs_[k];
  Incidence r;
  r.od_w = (u == pw.origin && v == pw.destination) ? 1 : 0;
  r.oo_wk = (u == pw.origin && v == pk.origin) ? 1 : 0;
  r.od_wk = (u == pw.origin && v == pk.destination) ? 1 : 0;
  r.dd_wk = (u == pw.destination && v == pk.destination) ? 1 : 0;
  r.do_wk = (u == pw.destination && v == pk.origin) ? 1 : 0;
  return r;
}

bool ODHypergraph::is_closed_circulation() const {
  const auto all = nodes();
  for (const auto& n : all)
    if (out_edges(n).empty() || in_edges(n).empty()) return false;
  const int W = num_pairs();
  for (int w = 0; w < W; ++w) {
    std::vector<bool> seen(all.size(), false);
    auto idx = [&](const OdNode& n) { return static_cast<int>(n.kind) * W + n.w; };
    std::queue<OdNode> bfs;
    bfs.push({NodeKind::virtual_dest, w});
    seen[idx(bfs.front())] = true;
    while (!bfs.empty()) {
      OdNode n = bfs.front();
      bfs.pop();
      for (int e : out_edges(n)) {
        OdNode h = edges_[e].head();
        if (!seen[idx(h)]) {
          seen[idx(h)] = true;
          bfs.push(h);
        }
      }
    }
    for (int k = 0; k < W; ++k)
      if (!seen[idx({NodeKind::virtual_origin, k})]) return false;
  }
  return true;
}

ODHypergraph build_hypergraph(const RoadNetwork& net, const std::vector<std::pair<int, int>>& od_pairs,
                              int num_providers) {
  if (od_pairs.empty()) throw std::invalid_argument("OD pair list is empty");
  if (num_providers < 1) throw std::invalid_argument("at least one provider is required");
  std::set<std::pair<int, int>> seen;
  std::vector<OdPairRef> refs;
  for (const auto& [o, d] : od_pairs) {
    if (o == d) throw std::invalid_argument("OD pair (" + std::to_string(o) + "," + std::to_string(d) +
                                            ") has origin equal to destination");
    if (!seen.insert({o, d}).second)
      throw std::invalid_argument("duplicate OD pair (" + std::to_string(o) + "," + std::to_string(d) + ")");
    int io = net.index_of(o), id = net.index_of(d);
    if (io < 0 || id < 0)
      throw std::invalid_argument("OD pair (" + std::to_string(o) + "," + std::to_string(d) +
                                  ") references a node outside the network");
    refs.push_back({io, id});
  }
  return ODHypergraph(std::move(refs), num_providers);
}

std::string node_label(const OdNode& n) { return std::string(to_string(n.kind)) + std::to_string(n.w + 1); }

std::string edge_label(const OdEdge& e) {
  return std::string(to_string(e.kind)) + "(" + node_label(e.tail()) + "->" + node_label(e.head()) + ")";
}

}  // namespace ehaileq
