// Complementarity residual of an LP's KKT system at a given primal/dual pair.
#pragma once

#include <string>
#include <vector>

#include "ehaileq/lp.hpp"

namespace ehaileq {

struct Residual {
  double value = 0.0;
  std::string where;  // name of the worst row or column

  void update(double v, const std::string& name) {
    if (v > value) {
      value = v;
      where = name;
    }
  }
  void merge(const Residual& o, const std::string& prefix) {
    if (o.value > value) {
      value = o.value;
      where = prefix + o.where;
    }
  }
};

// Rows: primal feasibility |eq|, max(0, violation) for inequalities, dual
// sign, |min(slack, |y|)|. Columns: |min(x_j, c_j - a_j'y)|.
// var_names may be empty; then columns are reported by index.
Residual kkt_residual(const LinearProgram& lp, const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<std::string>& var_names = {});

// Primal-only part of the residual (rows and x >= 0).
Residual primal_residual(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace ehaileq
