// JSON and CSV output of equilibrium states and sweeps.
#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ehaileq/equilibrium.hpp"
#include "ehaileq/sweeps.hpp"

namespace ehaileq {

// Shortest round-trip decimal form.
std::string format_number(double v);

nlohmann::json state_to_json(const Instance& inst, const EquilibriumState& s);
nlohmann::json graph_to_json(const Instance& inst);

std::string metrics_csv(const Instance& inst, const EquilibriumState& s);
std::string trace_csv(const EquilibriumState& s);
std::string utilities_csv(const Instance& inst, const EquilibriumState& s);
std::string residual_report(const Instance& inst, const EquilibriumState& s);

// Figure families: demand, utility, metrics and OD times against the swept value.
std::string sweep_demand_csv(const SweepResult& r);
std::string sweep_utility_csv(const SweepResult& r);
std::string sweep_metrics_csv(const SweepResult& r);
std::string sweep_times_csv(const SweepResult& r);
std::string sweep_thresholds_csv(const SweepResult& r);

void write_text(const std::string& path, const std::string& text);

}  // namespace ehaileq
