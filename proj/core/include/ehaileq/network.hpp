// Road network model and TNTP reader/writer.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehaileq {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}
  int line;
};

struct Link {
  int tail = 0;  // node index into RoadNetwork::nodes
  int head = 0;
  double capacity = 1.0;
  double length = 0.0;
  double free_flow_time = 0.0;
  double bpr_a = 0.15;
  double bpr_b = 4.0;
  double speed_limit = 0.0;
  double toll = 0.0;
  int type = 1;
};

struct RoadNetwork {
  std::vector<int> nodes;  // external ids, ascending
  std::vector<Link> links;
  std::vector<bool> is_origin;
  std::vector<bool> is_destination;
  int zones = 0;
  int first_thru_node = 1;
  // Optional OD table read from a trips file, keyed by external ids.
  std::map<std::pair<int, int>, double> trips;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_links() const { return static_cast<int>(links.size()); }
  // Index of an external node id, or -1.
  int index_of(int id) const;
  bool is_intermediate(int v) const { return !is_origin[v] && !is_destination[v]; }
  // Outgoing / incoming link indices per node.
  std::vector<std::vector<int>> out_links() const;
  std::vector<std::vector<int>> in_links() const;
};

RoadNetwork parse_tntp(const std::string& net_text, const std::string& trips_text = "");
std::string serialize_tntp(const RoadNetwork& net);
std::string serialize_trips(const RoadNetwork& net);

double bpr_time(const Link& link, double flow);
// d t / d flow
double bpr_derivative(const Link& link, double flow);
// Integral of bpr_time from 0 to flow (Beckmann term).
double bpr_integral(const Link& link, double flow);

// Marks origin/destination flags from an OD list given as external ids.
void mark_od_nodes(RoadNetwork& net, const std::vector<std::pair<int, int>>& od);

void scale_capacity(RoadNetwork& net, double factor);

std::string read_file(const std::string& path);

}  // namespace ehaileq
