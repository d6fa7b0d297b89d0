// Certificates checked on every converged equilibrium state. Each entry is the
// worst violation found; the caller compares against its own tolerance.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ehaileq/equilibrium.hpp"

namespace ehaileq::test {

struct StateViolations {
  double conservation = 0.0;  // relative, per OD-graph node
  double fleet = 0.0;         // hours above S
  double y_bounds = 0.0;      // y < 0 or y > z
  double demand_split = 0.0;  // |sum_m q - q_w| / max(1, q_w)
  double fractions = 0.0;     // wait-fraction KKT rows
  double unified = 0.0;       // unified residual
  double wardrop = 0.0;       // spread of used path times, hours
  double utility_sum = 0.0;   // itemization vs total, and vs its inputs
};

inline StateViolations check_state(const Instance& inst, const EquilibriumState& s) {
  StateViolations v;
  const auto& hg = inst.graph;
  const int W = hg.num_pairs(), N = inst.scenario.num_providers();
  for (int w = 0; w < W; ++w) {
    double q = 0.0;
    for (int n = 0; n < N; ++n) q += s.providers[n].q_solo[w] + s.providers[n].q_pool[w];
    const double qw = inst.scenario.demands[w].rate;
    v.demand_split = std::max(v.demand_split, std::abs(q - qw) / std::max(1.0, qw));
  }
  for (int n = 0; n < N; ++n) {
    const ProviderState& ps = s.providers[n];
    double scale = 1.0;
    for (double z : ps.z) scale = std::max(scale, std::abs(z));
    for (const auto& node : hg.nodes()) {
      double in = 0.0, out = 0.0;
      for (int e : hg.in_edges(node)) in += ps.z[e];
      for (int e : hg.out_edges(node)) out += ps.z[e];
      v.conservation = std::max(v.conservation, std::abs(in - out) / scale);
    }
    ProviderDerived d = derive_provider(inst, s.tables, n, ps);
    const double hours = fleet_hours(d.costs, ps.z);
    v.fleet = std::max(v.fleet, hours - inst.scenario.providers[n].fleet);
    for (int w = 0; w < W; ++w) {
      if (!ps.y.solo.empty()) {
        const double zs = ps.z[hg.edge_index(EdgeKind::solo, w, w)];
        v.y_bounds = std::max({v.y_bounds, -ps.y.solo[w], ps.y.solo[w] - zs});
      }
      if (!ps.y.pool.empty())
        for (int e = 0; e < hg.num_edges(); ++e)
          v.y_bounds = std::max({v.y_bounds, -ps.y.pool[w][e], ps.y.pool[w][e] - ps.z[e]});
    }
    v.fractions = std::max(v.fractions, wait_fraction_residual(hg, ps.z, d.fractions).value);
    for (int w = 0; w < W; ++w) {
      for (const auto* u : {&d.u_solo[w], &d.u_pool[w]}) {
        const double sum = u->fare + u->waiting + u->surplus + u->friction + u->surp_pas + u->od_cost;
        v.utility_sum = std::max(v.utility_sum, std::abs(sum - u->total()));
      }
      v.utility_sum = std::max({v.utility_sum, std::abs(d.u_solo[w].fare - d.fares.solo[w]),
                                std::abs(d.u_pool[w].fare - d.fares.pool[w]),
                                std::abs(d.u_solo[w].waiting - d.wait_solo[w]),
                                std::abs(d.u_pool[w].waiting - d.wait_pool[w]),
                                std::abs(d.u_solo[w].friction - d.friction_solo[w].value),
                                std::abs(d.u_pool[w].friction - d.friction_pool[w].value)});
    }
  }
  v.unified = unified_residual(inst, s).value;
  for (const auto& [od, paths] : s.links.paths) {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : paths) {
      if (p.flow <= 0.0) continue;
      double t = 0.0;
      for (int e : p.links) t += s.links.t[e];
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    if (hi >= lo) v.wardrop = std::max(v.wardrop, hi - lo);
  }
  return v;
}

}  // namespace ehaileq::test
