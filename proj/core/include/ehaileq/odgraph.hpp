// Layered OD hypergraph: solo and pooling vehicle layers per provider, the
// passenger layers, virtual source/sink nodes and rebalancing edges.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ehaileq/scenario.hpp"

namespace ehaileq {

struct RoadNetwork;

enum class NodeKind {
  solo_origin,     // w-bar in the solo layer
  solo_dest,       // w-underbar in the solo layer
  pool_origin,     // w-bar in the pooling layer
  pool_dest,       // w-underbar in the pooling layer
  virtual_origin,  // w-bar'
  virtual_dest     // w-underbar'
};

struct OdNode {
  NodeKind kind;
  int w;
  bool operator==(const OdNode&) const = default;
};

enum class EdgeKind {
  solo,             // (w-bar, w-underbar) solo layer
  oo,               // (w-bar, k-bar), w != k
  od,               // (w-bar, k-underbar), all w, k
  dd,               // (w-underbar, k-underbar), w != k
  vo_solo,          // (w-bar', w-bar solo)
  vo_pool,          // (w-bar', w-bar pool)
  vd_solo,          // (w-underbar solo, w-underbar')
  vd_pool,          // (w-underbar pool, w-underbar')
  rebalance         // (w-underbar', k-bar')
};

const char* to_string(EdgeKind k);
const char* to_string(NodeKind k);

struct OdEdge {
  EdgeKind kind;
  int w;  // tail pair
  int k;  // head pair (equals w for solo and virtual edges)
  OdNode tail() const;
  OdNode head() const;
};

struct OdPairRef {
  int origin;       // road node index
  int destination;  // road node index
};

struct OdPath {
  int owner = 0;
  Mode mode = Mode::solo;
  std::vector<OdNode> nodes;
};

// A pooled vehicle itinerary for an ordered pair (first pickup w, partner k).
struct PooledSequence {
  int first = 0;
  int second = 0;
  std::vector<OdNode> stops;  // origins/destinations in visiting order
  std::string label;          // e.g. "O1-O2-D1-D2"
};

struct Incidence {
  int od_w = 0;   // (u,v) = (o_w, d_w)
  int oo_wk = 0;  // (o_w, o_k)
  int od_wk = 0;  // (o_w, d_k)
  int dd_wk = 0;  // (d_w, d_k)
  int do_wk = 0;  // (d_w, o_k)
};

class ODHypergraph {
 public:
  ODHypergraph(std::vector<OdPairRef> pairs, int num_providers);

  int num_pairs() const { return static_cast<int>(pairs_.size()); }
  int num_providers() const { return providers_; }
  const std::vector<OdPairRef>& pairs() const { return pairs_; }
  const OdPairRef& pair(int w) const { return pairs_[w]; }

  // Vehicle-layer and virtual edges of one provider, in canonical order.
  const std::vector<OdEdge>& edges() const { return edges_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  // Index of an edge in edges(), or -1 when it does not exist.
  int edge_index(EdgeKind kind, int w, int k) const;
  // Edges of a layer for one provider.
  std::vector<int> edges_of(EdgeKind kind) const;

  // Node sets for one provider: all six kinds, W copies each.
  std::vector<OdNode> nodes() const;
  std::vector<int> out_edges(const OdNode& n) const;
  std::vector<int> in_edges(const OdNode& n) const;

  int count_solo_edges() const { return num_pairs(); }
  int count_pool_edges() const;
  int count_rebalance_edges() const { return num_pairs() * num_pairs(); }
  // Size of the complete augmented node-pair graph over the W origin and W
  // destination copies: OO, OD, DD and DO pairs for every ordered (w,k),
  // self pairs included, i.e. 4|W|^2.
  int full_arc_count() const { return 4 * num_pairs() * num_pairs(); }

  // Road-node pair of an OD-graph node pair.
  int road_node(const OdNode& n) const;

  std::vector<OdPath> enumerate_paths(int w, Mode mode) const;
  std::vector<PooledSequence> pooled_sequences() const;

  // Passenger-layer edges pair w may ride in the pooling layer.
  std::vector<int> passenger_edges(int w) const;

  // Node-OD incidence indicators on road nodes (u,v) for pairs (w,k).
  Incidence incidence(int u, int v, int w, int k) const;

  // Every node has an in- and out-edge, and every virtual destination
  // reaches every virtual origin.
  bool is_closed_circulation() const;

 private:
  std::vector<OdPairRef> pairs_;
  int providers_;
  std::vector<OdEdge> edges_;
  std::vector<int> lookup_;  // kind * W * W + w * W + k
};

ODHypergraph build_hypergraph(const RoadNetwork& net, const std::vector<std::pair<int, int>>& od_pairs,
                              int num_providers);

std::string node_label(const OdNode& n);
std::string edge_label(const OdEdge& e);

}  // namespace ehaileq
