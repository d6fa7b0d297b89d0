#include "ehaileq/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ehaileq {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& tok, int line) {
  double v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) throw ParseError("bad number '" + tok + "'", line);
  return v;
}

int to_int(const std::string& tok, int line) {
  double v = to_double(tok, line);
  if (v != std::floor(v)) throw ParseError("expected integer, got '" + tok + "'", line);
  return static_cast<int>(v);
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Reads "<KEY> value" metadata up to <END OF METADATA>; returns the line
// index after it.
std::size_t read_metadata(const std::vector<std::string>& lines, std::map<std::string, std::string>& meta) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string s = trim(lines[i]);
    if (s.empty()) continue;
    if (s == "<END OF METADATA>") return i + 1;
    if (s[0] != '<') throw ParseError("malformed header: expected <KEY> value", static_cast<int>(i + 1));
    auto close = s.find('>');
    if (close == std::string::npos) throw ParseError("malformed header: missing '>'", static_cast<int>(i + 1));
    meta[s.substr(1, close - 1)] = trim(s.substr(close + 1));
  }
  throw ParseError("malformed header: missing <END OF METADATA>", static_cast<int>(lines.size()));
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) lines.push_back(l);
  return lines;
}

void parse_trips(RoadNetwork& net, const std::string& text) {
  auto lines = split_lines(text);
  std::map<std::string, std::string> meta;
  std::size_t i = read_metadata(lines, meta);
  int origin = -1;
  for (; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i + 1);
    std::string s = trim(lines[i]);
    if (s.empty() || s[0] == '~') continue;
    if (s.rfind("Origin", 0) == 0) {
      origin = to_int(trim(s.substr(6)), ln);
      if (net.index_of(origin) < 0) throw ParseError("dangling node reference " + std::to_string(origin), ln);
      continue;
    }
    if (origin < 0) throw ParseError("trip entry before any Origin block", ln);
    std::istringstream ss(s);
    std::string entry;
    while (std::getline(ss, entry, ';')) {
      entry = trim(entry);
      if (entry.empty()) continue;
      auto colon = entry.find(':');
      if (colon == std::string::npos) throw ParseError("malformed trip entry '" + entry + "'", ln);
      int dest = to_int(trim(entry.substr(0, colon)), ln);
      double q = to_double(trim(entry.substr(colon + 1)), ln);
      if (net.index_of(dest) < 0) throw ParseError("dangling node reference " + std::to_string(dest), ln);
      if (q != 0.0) net.trips[{origin, dest}] = q;
    }
  }
}

}  // namespace

int RoadNetwork::index_of(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
  if (it == nodes.end() || *it != id) return -1;
  return static_cast<int>(it - nodes.begin());
}

std::vector<std::vector<int>> RoadNetwork::out_links() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (int e = 0; e < num_links(); ++e) out[links[e].tail].push_back(e);
  return out;
}

std::vector<std::vector<int>> RoadNetwork::in_links() const {
  std::vector<std::vector<int>> in(nodes.size());
  for (int e = 0; e < num_links(); ++e) in[links[e].head].push_back(e);
  return in;
}

RoadNetwork parse_tntp(const std::string& net_text, const std::string& trips_text) {
  auto lines = split_lines(net_text);
  std::map<std::string, std::string> meta;
  std::size_t i = read_metadata(lines, meta);
  auto need = [&](const char* key) -> int {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(std::string("malformed header: missing <") + key + ">", 1);
    return to_int(it->second, 1);
  };
  RoadNetwork net;
  const int num_nodes = need("NUMBER OF NODES");
  const int num_links = need("NUMBER OF LINKS");
  if (meta.count("NUMBER OF ZONES")) net.zones = to_int(meta["NUMBER OF ZONES"], 1);
  if (meta.count("FIRST THRU NODE")) net.first_thru_node = to_int(meta["FIRST THRU NODE"], 1);
  if (num_nodes <= 0) throw ParseError("malformed header: <NUMBER OF NODES> must be positive", 1);
  for (int v = 1; v <= num_nodes; ++v) net.nodes.push_back(v);

  std::set<std::pair<int, int>> seen;
  for (; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i + 1);
    std::string s = trim(lines[i]);
    if (s.empty() || s[0] == '~') continue;
    if (s.back() == ';') s.pop_back();
    std::istringstream ss(s);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.size() < 8) throw ParseError("link row needs at least 8 columns", ln);
    int a = to_int(tok[0], ln), b = to_int(tok[1], ln);
    int ia = net.index_of(a), ib = net.index_of(b);
    if (ia < 0 || ib < 0) throw ParseError("dangling node reference " + std::to_string(ia < 0 ? a : b), ln);
    if (!seen.insert({a, b}).second)
      throw ParseError("duplicate link (" + std::to_string(a) + "," + std::to_string(b) + ")", ln);
    Link l;
    l.tail = ia;
    l.head = ib;
    l.capacity = to_double(tok[2], ln);
    l.length = to_double(tok[3], ln);
    l.free_flow_time = to_double(tok[4], ln);
    l.bpr_a = to_double(tok[5], ln);
    l.bpr_b = to_double(tok[6], ln);
    if (tok.size() > 7) l.speed_limit = to_double(tok[7], ln);
    if (tok.size() > 8) l.toll = to_double(tok[8], ln);
    if (tok.size() > 9) l.type = to_int(tok[9], ln);
    if (!(l.capacity > 0)) throw ParseError("capacity must be positive", ln);
    if (l.free_flow_time < 0) throw ParseError("free-flow time must be nonnegative", ln);
    net.links.push_back(l);
  }
  if (net.links.empty()) throw ParseError("no links", 0);
  if (static_cast<int>(net.links.size()) != num_links)
    throw ParseError("<NUMBER OF LINKS> is " + std::to_string(num_links) + " but table has " +
                         std::to_string(net.links.size()) + " rows",
                     0);
  net.is_origin.assign(net.nodes.size(), false);
  net.is_destination.assign(net.nodes.size(), false);
  if (!trips_text.empty()) parse_trips(net, trips_text);
  return net;
}

std::string serialize_tntp(const RoadNetwork& net) {
  std::ostringstream o;
  o << "<NUMBER OF ZONES> " << net.zones << "\n";
  o << "<NUMBER OF NODES> " << net.nodes.size() << "\n";
  o << "<FIRST THRU NODE> " << net.first_thru_node << "\n";
  o << "<NUMBER OF LINKS> " << net.links.size() << "\n";
  o << "<END OF METADATA>\n\n";
  o << "~\tInit node\tTerm node\tCapacity\tLength\tFree Flow Time\tB\tPower\tSpeed limit\tToll\tType\t;\n";
  for (const auto& l : net.links) {
    o << '\t' << net.nodes[l.tail] << '\t' << net.nodes[l.head] << '\t' << fmt(l.capacity) << '\t'
      << fmt(l.length) << '\t' << fmt(l.free_flow_time) << '\t' << fmt(l.bpr_a) << '\t' << fmt(l.bpr_b)
      << '\t' << fmt(l.speed_limit) << '\t' << fmt(l.toll) << '\t' << l.type << "\t;\n";
  }
  return o.str();
}

std::string serialize_trips(const RoadNetwork& net) {
  std::ostringstream o;
  double total = 0;
  for (const auto& [k, q] : net.trips) total += q;
  o << "<NUMBER OF ZONES> " << net.zones << "\n<TOTAL OD FLOW> " << fmt(total) << "\n<END OF METADATA>\n\n";
  int cur = -1;
  for (const auto& [k, q] : net.trips) {
    if (k.first != cur) {
      cur = k.first;
      o << "\nOrigin " << cur << "\n";
    }
    o << "    " << k.second << " : " << fmt(q) << ";\n";
  }
  return o.str();
}

double bpr_time(const Link& l, double flow) {
  return l.free_flow_time * (1.0 + l.bpr_a * std::pow(std::max(0.0, flow) / l.capacity, l.bpr_b));
}

double bpr_derivative(const Link& l, double flow) {
  if (l.bpr_b == 0.0) return 0.0;
  const double r = std::max(0.0, flow) / l.capacity;
  return l.free_flow_time * l.bpr_a * l.bpr_b * std::pow(r, l.bpr_b - 1.0) / l.capacity;
}

double bpr_integral(const Link& l, double flow) {
  const double x = std::max(0.0, flow);
  return l.free_flow_time * (x + l.bpr_a * l.capacity * std::pow(x / l.capacity, l.bpr_b + 1.0) / (l.bpr_b + 1.0));
}

void mark_od_nodes(RoadNetwork& net, const std::vector<std::pair<int, int>>& od) {
  net.is_origin.assign(net.nodes.size(), false);
  net.is_destination.assign(net.nodes.size(), false);
  for (const auto& [o, d] : od) {
    int io = net.index_of(o), id = net.index_of(d);
    if (io < 0 || id < 0) throw ParseError("OD pair references unknown node", 0);
    net.is_origin[io] = true;
    net.is_destination[id] = true;
  }
}

void scale_capacity(RoadNetwork& net, double factor) {
  for (auto& l : net.links) l.capacity *= factor;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ehaileq
