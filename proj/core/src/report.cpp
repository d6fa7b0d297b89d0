#include "ehaileq/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ehaileq {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string pair_label(const Instance& inst, int w) {
  const auto& d = inst.scenario.demands[w];
  return "(" + std::to_string(d.origin) + "," + std::to_string(d.destination) + ")";
}

}  // namespace

json state_to_json(const Instance& inst, const EquilibriumState& s) {
  const auto& hg = inst.graph;
  json j;
  j["scenario"] = inst.scenario.name;
  j["status"] = s.status;
  j["converged"] = s.converged;
  j["feasible"] = s.feasible;
  j["iterations"] = s.iterations;
  j["residual"] = {{"value", num(s.residual.value)}, {"where", s.residual.where}};
  if (s.feasible) {
    ResidualBreakdown b = residual_breakdown(inst, s);
    j["residual_blocks"] = {{"dispatch", num(b.dispatch.value)},     {"matching", num(b.matching.value)},
                            {"assignment", num(b.assignment.value)}, {"mode_choice", num(b.choice.value)},
                            {"wait_fractions", num(b.fractions.value)}};
  }
  json pairs = json::array();
  for (int w = 0; w < hg.num_pairs(); ++w) {
    json p = {{"pair", pair_label(inst, w)}, {"demand", inst.scenario.demands[w].rate}};
    if (s.feasible) {
      const auto& pr = hg.pair(w);
      p["time"] = num(s.tables.t(pr.origin, pr.destination));
      p["free_flow_time"] = num(inst.baseline.t(pr.origin, pr.destination));
      p["mu"] = num(s.mu[w]);
    }
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  json provs = json::array();
  for (std::size_t n = 0; n < s.providers.size(); ++n) {
    const auto& ps = s.providers[n];
    json p;
    p["name"] = inst.scenario.providers[n].name;
    p["q_solo"] = vec(ps.q_solo);
    p["q_pool"] = vec(ps.q_pool);
    json z = json::object();
    for (int e = 0; e < hg.num_edges(); ++e)
      if (ps.z[e] != 0.0) z[edge_label(hg.edges()[e])] = num(ps.z[e]);
    p["vehicle_flows"] = z;
    const auto& d = ps.duals;
    p["duals"] = {{"phi_solo", vec(d.phi_solo)},
                  {"phi_pool_origin", vec(d.phi_pool_origin)},
                  {"phi_pool_dest", vec(d.phi_pool_dest)},
                  {"lambda_fleet", num(d.lambda_fleet)},
                  {"virtual_balance", num(d.virtual_balance)}};
    p["matching_status"] = to_string(ps.matching_status);
    json y = json::object();
    for (int w = 0; w < hg.num_pairs(); ++w)
      for (int e = 0; e < hg.num_edges(); ++e)
        if (!ps.y.pool.empty() && ps.y.pool[w][e] != 0.0)
          y["pair" + std::to_string(w + 1) + " " + edge_label(hg.edges()[e])] = num(ps.y.pool[w][e]);
    p["passenger_flows"] = y;
    // sum over pairs of y / z; above 2 means more riders than seats
    p["max_summed_occupancy"] = num(ps.y.pool.empty() ? 0.0 : max_summed_occupancy(hg, ps.y, ps.z));
    p["fleet_hours"] = num(fleet_hours(derive_provider(inst, s.tables, static_cast<int>(n), ps).costs, ps.z));
    provs.push_back(p);
  }
  j["providers"] = provs;
  json links = json::array();
  const auto& net = inst.network;
  for (int e = 0; e < net.num_links() && !s.links.x.empty(); ++e)
    if (s.links.x[e] != 0.0)
      links.push_back({{"tail", net.nodes[net.links[e].tail]},
                       {"head", net.nodes[net.links[e].head]},
                       {"flow", num(s.links.x[e])},
                       {"time", num(s.links.t[e])}});
  j["links"] = links;
  json trace = json::array();
  for (const auto& r : s.trace)
    trace.push_back({{"iteration", r.iteration},
                     {"residual", num(r.residual)},
                     {"where", r.where},
                     {"step", num(r.step)},
                     {"support_changed", r.support_changed},
                     {"backtracks", r.backtracks}});
  j["trace"] = trace;
  return j;
}

json graph_to_json(const Instance& inst) {
  const auto& hg = inst.graph;
  json j;
  j["pairs"] = json::array();
  for (int w = 0; w < hg.num_pairs(); ++w) j["pairs"].push_back(pair_label(inst, w));
  j["full_arc_count"] = hg.full_arc_count();
  j["edge_count"] = hg.num_edges();
  j["pool_edge_count"] = hg.count_pool_edges();
  j["closed_circulation"] = hg.is_closed_circulation();
  json edges = json::array();
  for (int e = 0; e < hg.num_edges(); ++e) {
    const OdEdge& ed = hg.edges()[e];
    edges.push_back({{"label", edge_label(ed)},
                     {"kind", to_string(ed.kind)},
                     {"tail", node_label(ed.tail())},
                     {"head", node_label(ed.head())},
                     {"road_tail", inst.network.nodes[hg.road_node(ed.tail())]},
                     {"road_head", inst.network.nodes[hg.road_node(ed.head())]}});
  }
  j["edges"] = edges;
  json seq = json::array();
  for (const auto& s : hg.pooled_sequences()) seq.push_back(s.label);
  j["pooled_sequences"] = seq;
  return j;
}

std::string metrics_csv(const Instance& inst, const EquilibriumState& s) {
  std::ostringstream os;
  os << "provider,DHM,STC,TVH\n";
  auto m = compute_metrics(inst, s);
  for (std::size_t n = 0; n < m.size(); ++n) {
    const std::string name = n + 1 == m.size() ? "total" : inst.scenario.providers[n].name;
    os << name << ',' << format_number(m[n].dhm) << ',' << format_number(m[n].stc) << ',' << format_number(m[n].tvh)
       << '\n';
  }
  return os.str();
}

std::string trace_csv(const EquilibriumState& s) {
  std::ostringstream os;
  os << "iteration,residual,where,step,support_changed,backtracks\n";
  for (const auto& r : s.trace)
    os << r.iteration << ',' << format_number(r.residual) << ",\"" << r.where << "\"," << format_number(r.step) << ','
       << (r.support_changed ? 1 : 0) << ',' << r.backtracks << '\n';
  return os.str();
}

std::string utilities_csv(const Instance& inst, const EquilibriumState& s) {
  std::ostringstream os;
  os << "pair,provider,mode,demand,fare,waiting,surplus,friction,friction_capped,surp_pas,od_cost,total\n";
  if (!s.feasible) return os.str();
  for (std::size_t n = 0; n < s.providers.size(); ++n) {
    ProviderDerived d = derive_provider(inst, s.tables, static_cast<int>(n), s.providers[n]);
    for (int w = 0; w < inst.graph.num_pairs(); ++w)
      for (Mode m : {Mode::solo, Mode::pool}) {
        const UtilityItems& u = m == Mode::solo ? d.u_solo[w] : d.u_pool[w];
        const bool capped = m == Mode::solo ? d.friction_solo[w].capped : d.friction_pool[w].capped;
        const double q = m == Mode::solo ? s.providers[n].q_solo[w] : s.providers[n].q_pool[w];
        os << '"' << pair_label(inst, w) << "\"," << inst.scenario.providers[n].name << ',' << to_string(m) << ','
           << format_number(q) << ',' << format_number(u.fare) << ',' << format_number(u.waiting) << ','
           << format_number(u.surplus) << ',' << format_number(u.friction) << ',' << (capped ? 1 : 0) << ','
           << format_number(u.surp_pas) << ',' << format_number(u.od_cost) << ',' << format_number(u.total())
           << '\n';
      }
  }
  return os.str();
}

std::string residual_report(const Instance& inst, const EquilibriumState& s) {
  std::ostringstream os;
  os << "status: " << s.status << '\n';
  os << "iterations: " << s.iterations << '\n';
  os << "unified residual: " << format_number(s.residual.value) << " at " << s.residual.where << '\n';
  if (s.feasible) {
    ResidualBreakdown b = residual_breakdown(inst, s);
    os << "dispatch: " << format_number(b.dispatch.value) << " at " << b.dispatch.where << '\n';
    os << "matching: " << format_number(b.matching.value) << " at " << b.matching.where << '\n';
    os << "assignment: " << format_number(b.assignment.value) << " at " << b.assignment.where << '\n';
    os << "mode choice: " << format_number(b.choice.value) << " at " << b.choice.where << '\n';
    os << "wait fractions: " << format_number(b.fractions.value) << " at " << b.fractions.where << '\n';
  }
  return os.str();
}

namespace {

std::string pair_text(const SweepResult& r, int w) {
  return "\"(" + std::to_string(r.pairs[w].first) + "," + std::to_string(r.pairs[w].second) + ")\"";
}

}  // namespace

std::string sweep_demand_csv(const SweepResult& r) {
  std::ostringstream os;
  os << r.param << ",pair,provider,mode,demand,share,converged,residual\n";
  for (const auto& p : r.points) {
    if (!p.state.feasible) continue;
    for (std::size_t w = 0; w < r.pairs.size(); ++w)
      for (std::size_t n = 0; n < r.providers.size(); ++n)
        for (Mode m : {Mode::solo, Mode::pool}) {
          const double q = mode_demand(p, static_cast<int>(w), m, static_cast<int>(n));
          os << format_number(p.value) << ',' << pair_text(r, static_cast<int>(w)) << ',' << r.providers[n] << ','
             << to_string(m) << ',' << format_number(q) << ','
             << format_number(p.demand[w] > 0 ? q / p.demand[w] : 0.0) << ',' << (p.state.converged ? 1 : 0) << ','
             << format_number(p.state.residual.value) << '\n';
        }
  }
  return os.str();
}

std::string sweep_utility_csv(const SweepResult& r) {
  std::ostringstream os;
  os << r.param << ",pair,provider,mode,fare,waiting,surplus,friction,surp_pas,od_cost,total\n";
  for (const auto& p : r.points)
    for (std::size_t n = 0; n < p.derived.size(); ++n)
      for (std::size_t w = 0; w < r.pairs.size(); ++w)
        for (Mode m : {Mode::solo, Mode::pool}) {
          const UtilityItems& u = m == Mode::solo ? p.derived[n].u_solo[w] : p.derived[n].u_pool[w];
          os << format_number(p.value) << ',' << pair_text(r, static_cast<int>(w)) << ',' << r.providers[n] << ','
             << to_string(m) << ',' << format_number(u.fare) << ',' << format_number(u.waiting) << ','
             << format_number(u.surplus) << ',' << format_number(u.friction) << ',' << format_number(u.surp_pas)
             << ',' << format_number(u.od_cost) << ',' << format_number(u.total()) << '\n';
        }
  return os.str();
}

std::string sweep_metrics_csv(const SweepResult& r) {
  std::ostringstream os;
  os << r.param << ",provider,DHM,STC,TVH,lambda_fleet,converged,residual,status\n";
  for (const auto& p : r.points) {
    if (!p.error.empty()) {
      os << format_number(p.value) << ",,,,,,0,inf,\"error: " << p.error << "\"\n";
      continue;
    }
    for (std::size_t n = 0; n < p.metrics.size(); ++n) {
      const bool total = n + 1 == p.metrics.size();
      os << format_number(p.value) << ',' << (total ? "total" : r.providers[n]) << ','
         << format_number(p.metrics[n].dhm) << ',' << format_number(p.metrics[n].stc) << ','
         << format_number(p.metrics[n].tvh) << ','
         << (total ? std::string() : format_number(p.state.providers[n].duals.lambda_fleet)) << ','
         << (p.state.converged ? 1 : 0) << ',' << format_number(p.state.residual.value) << ",\"" << p.state.status
         << "\"\n";
    }
    if (p.metrics.empty())
      os << format_number(p.value) << ",,,,,,0," << format_number(p.state.residual.value) << ",\"" << p.state.status
         << "\"\n";
  }
  return os.str();
}

std::string sweep_times_csv(const SweepResult& r) {
  std::ostringstream os;
  os << r.param << ",pair,equilibrium_time,free_flow_time\n";
  for (const auto& p : r.points)
    for (std::size_t w = 0; w < p.od_time.size(); ++w)
      os << format_number(p.value) << ',' << pair_text(r, static_cast<int>(w)) << ',' << format_number(p.od_time[w])
         << ',' << format_number(p.free_time[w]) << '\n';
  return os.str();
}

std::string sweep_thresholds_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "pair,mode,threshold,half_width\n";
  for (std::size_t w = 0; w < r.pairs.size(); ++w)
    for (Mode m : {Mode::solo, Mode::pool}) {
      Threshold t = threshold_detect(r, static_cast<int>(w), m);
      os << pair_text(r, static_cast<int>(w)) << ',' << to_string(m) << ','
         << (t.found ? format_number(t.value) : "none") << ',' << (t.found ? format_number(t.half_width) : "")
         << '\n';
    }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

}  // namespace ehaileq
