// Dense node-pair tables of OD-graph travel times (hours) and distances (miles).
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehaileq {

struct TravelTables {
  int n = 0;
  std::vector<double> time;  // row-major n x n, NaN where not computed
  std::vector<double> dist;

  TravelTables() = default;
  explicit TravelTables(int nodes)
      : n(nodes),
        time(static_cast<std::size_t>(nodes) * nodes, std::numeric_limits<double>::quiet_NaN()),
        dist(static_cast<std::size_t>(nodes) * nodes, std::numeric_limits<double>::quiet_NaN()) {
    for (int i = 0; i < n; ++i) time[i * n + i] = dist[i * n + i] = 0.0;
  }

  bool has(int u, int v) const { return !std::isnan(time[u * n + v]); }
  double t(int u, int v) const {
    double x = time[u * n + v];
    if (std::isnan(x))
      throw std::out_of_range("no travel time for node pair (" + std::to_string(u) + "," + std::to_string(v) + ")");
    return x;
  }
  double l(int u, int v) const {
    double x = dist[u * n + v];
    if (std::isnan(x))
      throw std::out_of_range("no distance for node pair (" + std::to_string(u) + "," + std::to_string(v) + ")");
    return x;
  }
  void set(int u, int v, double tt, double ll) {
    time[u * n + v] = tt;
    dist[u * n + v] = ll;
  }
};

}  // namespace ehaileq
