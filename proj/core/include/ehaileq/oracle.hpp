// Brute-force cross-check of dispatch and matching on two-pair instances: the
// LPs are rebuilt from their written rows and solved by an interior-point
// method that shares no code with the simplex.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ehaileq/equilibrium.hpp"
#include "ehaileq/lp.hpp"

namespace ehaileq {

struct IpmResult {
  bool converged = false;
  std::vector<double> x;
  std::vector<double> duals;  // same sign convention as LpResult
  double objective = 0.0;
  int iterations = 0;
};

// Mehrotra predictor-corrector on the standard form of lp. Dependent equality
// rows are dropped (their duals are reported as 0).
IpmResult solve_lp_interior(const LinearProgram& lp, double tol = 1e-11, int max_iter = 200);

struct OracleTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleCheck {
  std::string name;
  double value = 0.0;
};

struct OracleReport {
  double max_diff = 0.0;
  std::vector<OracleCheck> checks;
  std::vector<double> z;  // dispatch flows from the module
  bool passed(double tol = 1e-6) const { return max_diff < tol; }
};

struct OracleOptions {
  int provider = 0;
  double pool_share = 0.5;   // q^[p]_w = share * q_w, the rest e-solo
  double perturb_cost = 0.0;  // added to the module's first solo edge cost
};

// Free-flow instance. Throws OracleTooLarge for more than two pairs.
OracleReport run_oracle(const Instance& inst, const OracleOptions& opt = {});

}  // namespace ehaileq
