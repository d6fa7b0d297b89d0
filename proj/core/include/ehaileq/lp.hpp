// Dense revised simplex for the small LPs that appear in dispatch, matching
// and market clearing. Duals are exact basis duals.
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ehaileq {

enum class RowSense { le, ge, eq };

struct LpRow {
  std::vector<std::pair<int, double>> terms;
  RowSense sense = RowSense::eq;
  double rhs = 0.0;
  std::string name;
};

// min c'x  s.t. rows, x >= 0.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<LpRow> rows;

  int add_var(double c) {
    cost.push_back(c);
    return static_cast<int>(cost.size()) - 1;
  }
  int add_row(LpRow row) {
    rows.push_back(std::move(row));
    return static_cast<int>(rows.size()) - 1;
  }
  int num_vars() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus s);

struct LpOptions {
  // Minimise x_0, then x_1, ... over the optimal face.
  bool lexicographic = false;
  int max_iterations = 200000;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  int refactor_every = 64;
};

// Sign convention: c - A'y >= 0 at optimum, y >= 0 on ge rows, y <= 0 on le
// rows, y free on eq rows. Reported duals belong to the original objective
// even when the lexicographic pass moves the primal point.
struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> x;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  // Rows that phase one found linearly dependent on the others.
  std::vector<int> redundant_rows;
  // Phase-one infeasibility (sum of artificials) when status == infeasible.
  double infeasibility = 0.0;
};

LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt = {});

// Row activity a_i'x for every row.
std::vector<double> row_activity(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace ehaileq
