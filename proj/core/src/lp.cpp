#include "ehaileq/lp.hpp"

#include "ehaileq/kkt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehaileq {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

std::vector<double> row_activity(const LinearProgram& lp, const std::vector<double>& x) {
  std::vector<double> act(lp.rows.size(), 0.0);
  for (std::size_t i = 0; i < lp.rows.size(); ++i)
    for (const auto& [j, a] : lp.rows[i].terms) act[i] += a * x[j];
  return act;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.num_rows();
    n_ = lp.num_vars();
    int slacks = 0;
    for (const auto& r : lp.rows)
      if (r.sense != RowSense::eq) ++slacks;
    ncols_ = n_ + slacks + m_;  // worst case one artificial per row
    A_ = MatrixXd::Zero(m_, ncols_);
    b_ = VectorXd::Zero(m_);
    flip_.assign(m_, 1.0);
    kind_.assign(ncols_, Kind::structural);
    int next = n_;
    std::vector<int> slack_col(m_, -1);
    for (int i = 0; i < m_; ++i) {
      const auto& r = lp.rows[i];
      for (const auto& [j, a] : r.terms) A_(i, j) += a;
      b_(i) = r.rhs;
      if (r.sense != RowSense::eq) {
        A_(i, next) = r.sense == RowSense::le ? 1.0 : -1.0;
        kind_[next] = Kind::slack;
        slack_col[i] = next++;
      }
      if (b_(i) < 0) {
        A_.row(i) *= -1.0;
        b_(i) = -b_(i);
        flip_[i] = -1.0;
      }
    }
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (slack_col[i] >= 0 && A_(i, slack_col[i]) > 0) {
        basis_[i] = slack_col[i];
      } else {
        A_(i, next) = 1.0;
        kind_[next] = Kind::artificial;
        basis_[i] = next++;
      }
    }
    ncols_ = next;
    A_.conservativeResize(m_, ncols_);
    kind_.resize(ncols_);
    in_basis_.assign(ncols_, -1);
    for (int i = 0; i < m_; ++i) in_basis_[basis_[i]] = i;
    allowed_.assign(ncols_, true);
    cmax_ = 1.0;
    for (double c : lp.cost) cmax_ = std::max(cmax_, std::abs(c));
    bmax_ = 1.0;
    for (int i = 0; i < m_; ++i) bmax_ = std::max(bmax_, b_(i));
    refactor();
  }

  LpResult run() {
    LpResult res;
    // Phase one.
    VectorXd c1 = VectorXd::Zero(ncols_);
    for (int j = 0; j < ncols_; ++j)
      if (kind_[j] == Kind::artificial) c1(j) = 1.0;
    LpStatus st = iterate(c1, 1e-12);
    res.iterations = iterations_;
    if (st == LpStatus::iteration_limit) {
      res.status = st;
      return res;
    }
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (kind_[basis_[i]] == Kind::artificial) infeas += std::max(0.0, xB_(i));
    if (infeas > opt_.feasibility_tol * bmax_) {
      res.status = LpStatus::infeasible;
      res.infeasibility = infeas;
      return res;
    }
    drive_out_artificials(res.redundant_rows);
    for (int j = 0; j < ncols_; ++j)
      if (kind_[j] == Kind::artificial) allowed_[j] = false;

    // Phase two.
    VectorXd c = VectorXd::Zero(ncols_);
    for (int j = 0; j < n_; ++j) c(j) = lp_.cost[j];
    const double dtol = std::max(opt_.optimality_tol, 1e-14 * cmax_);
    st = iterate(c, dtol);
    res.iterations = iterations_;
    if (st != LpStatus::optimal) {
      res.status = st;
      return res;
    }
    refactor();
    VectorXd y = duals_for(c);
    VectorXd d = c - A_.transpose() * y;

    if (opt_.lexicographic) {
      for (int j = 0; j < ncols_; ++j)
        if (in_basis_[j] < 0 && d(j) > dtol) allowed_[j] = false;
      for (int j = 0; j < n_; ++j) {
        if (!allowed_[j]) continue;
        if (in_basis_[j] < 0) {
          allowed_[j] = false;
          continue;
        }
        VectorXd e = VectorXd::Zero(ncols_);
        e(j) = 1.0;
        if (iterate(e, 1e-11) != LpStatus::optimal) break;
        VectorXd ye = duals_for(e);
        VectorXd de = e - A_.transpose() * ye;
        for (int k = 0; k < ncols_; ++k)
          if (in_basis_[k] < 0 && de(k) > 1e-11) allowed_[k] = false;
      }
      refactor();
      res.iterations = iterations_;
    }

    res.status = LpStatus::optimal;
    res.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, xB_(i));
    res.duals.resize(m_);
    for (int i = 0; i < m_; ++i) res.duals[i] = flip_[i] * y(i);
    res.reduced_costs.assign(n_, 0.0);
    res.objective = 0.0;
    for (int j = 0; j < n_; ++j) res.objective += lp_.cost[j] * res.x[j];
    for (int j = 0; j < n_; ++j) {
      double s = lp_.cost[j];
      for (int i = 0; i < m_; ++i) s -= A_(i, j) * y(i);
      res.reduced_costs[j] = s;
    }
    res.dual_objective = 0.0;
    for (int i = 0; i < m_; ++i) res.dual_objective += lp_.rows[i].rhs * res.duals[i];
    return res;
  }

 private:
  enum class Kind { structural, slack, artificial };

  void refactor() {
    MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[i]);
    Binv_ = B.partialPivLu().inverse();
    xB_ = Binv_ * b_;
    for (int i = 0; i < m_; ++i)
      if (xB_(i) < 0 && xB_(i) > -1e-9 * bmax_) xB_(i) = 0.0;
    since_refactor_ = 0;
  }

  VectorXd duals_for(const VectorXd& c) const {
    VectorXd cB(m_);
    for (int i = 0; i < m_; ++i) cB(i) = c(basis_[i]);
    return Binv_.transpose() * cB;
  }

  void pivot(int r, int q, const VectorXd& alpha) {
    const double ar = alpha(r);
    const double theta = std::max(0.0, xB_(r)) / ar;
    xB_ -= theta * alpha;
    xB_(r) = theta;
    Eigen::RowVectorXd pr = Binv_.row(r) / ar;
    Binv_ -= alpha * pr;
    Binv_.row(r) = pr;
    in_basis_[basis_[r]] = -1;
    basis_[r] = q;
    in_basis_[q] = r;
    if (++since_refactor_ >= opt_.refactor_every) refactor();
  }

  LpStatus iterate(const VectorXd& c, double dtol) {
    int degenerate = 0;
    while (true) {
      if (iterations_ >= opt_.max_iterations) return LpStatus::iteration_limit;
      VectorXd y = duals_for(c);
      VectorXd d = c - A_.transpose() * y;
      const bool bland = degenerate > 50;
      int q = -1;
      double best = -dtol;
      for (int j = 0; j < ncols_; ++j) {
        if (!allowed_[j] || in_basis_[j] >= 0) continue;
        if (d(j) < best) {
          q = j;
          if (bland) break;
          best = d(j);
        }
      }
      if (q < 0) return LpStatus::optimal;
      VectorXd alpha = Binv_ * A_.col(q);
      int r = -1;
      double ratio = std::numeric_limits<double>::infinity();
      const double ptol = 1e-9;
      for (int i = 0; i < m_; ++i) {
        if (alpha(i) <= ptol) continue;
        const double t = std::max(0.0, xB_(i)) / alpha(i);
        if (r < 0 || t < ratio - 1e-12) {
          r = i;
          ratio = t;
        } else if (t <= ratio + 1e-12) {
          const bool better = bland ? basis_[i] < basis_[r] : alpha(i) > alpha(r);
          if (better) {
            r = i;
            ratio = std::min(ratio, t);
          }
        }
      }
      if (r < 0) return LpStatus::unbounded;
      degenerate = ratio * alpha(r) < 1e-12 ? degenerate + 1 : 0;
      pivot(r, q, alpha);
      ++iterations_;
    }
  }

  void drive_out_artificials(std::vector<int>& redundant) {
    for (int r = 0; r < m_; ++r) {
      if (kind_[basis_[r]] != Kind::artificial) continue;
      Eigen::RowVectorXd row = Binv_.row(r) * A_;
      int q = -1;
      double best = 1e-9;
      for (int j = 0; j < ncols_; ++j) {
        if (kind_[j] == Kind::artificial || in_basis_[j] >= 0) continue;
        if (std::abs(row(j)) > best) {
          best = std::abs(row(j));
          q = j;
        }
      }
      if (q < 0) {
        redundant.push_back(r);
        continue;
      }
      VectorXd alpha = Binv_ * A_.col(q);
      xB_(r) = 0.0;
      pivot(r, q, alpha);
    }
  }

  const LinearProgram& lp_;
  LpOptions opt_;
  int m_ = 0, n_ = 0, ncols_ = 0;
  MatrixXd A_;
  VectorXd b_;
  std::vector<double> flip_;
  std::vector<Kind> kind_;
  std::vector<int> basis_, in_basis_;
  std::vector<bool> allowed_;
  MatrixXd Binv_;
  VectorXd xB_;
  double cmax_ = 1.0, bmax_ = 1.0;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt) {
  if (lp.num_rows() == 0) {
    LpResult res;
    for (double c : lp.cost)
      if (c < 0) {
        res.status = LpStatus::unbounded;
        return res;
      }
    res.status = LpStatus::optimal;
    res.x.assign(lp.num_vars(), 0.0);
    res.reduced_costs = lp.cost;
    return res;
  }
  Simplex s(lp, opt);
  return s.run();
}

Residual primal_residual(const LinearProgram& lp, const std::vector<double>& x) {
  Residual r;
  auto act = row_activity(lp, x);
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    double v = 0.0;
    switch (row.sense) {
      case RowSense::eq: v = std::abs(act[i] - row.rhs); break;
      case RowSense::ge: v = std::max(0.0, row.rhs - act[i]); break;
      case RowSense::le: v = std::max(0.0, act[i] - row.rhs); break;
    }
    r.update(v, row.name);
  }
  for (int j = 0; j < lp.num_vars(); ++j) r.update(std::max(0.0, -x[j]), "x" + std::to_string(j) + ">=0");
  return r;
}

Residual kkt_residual(const LinearProgram& lp, const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<std::string>& var_names) {
  Residual r = primal_residual(lp, x);
  auto act = row_activity(lp, x);
  std::vector<double> d(lp.cost);
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    for (const auto& [j, a] : row.terms) d[j] -= a * y[i];
    if (row.sense == RowSense::eq) continue;
    const double slack = std::abs(act[i] - row.rhs);
    const double price = row.sense == RowSense::ge ? y[i] : -y[i];
    r.update(std::max(0.0, -price), row.name + " dual sign");
    r.update(std::abs(std::min(slack, std::abs(price))), row.name + " complementarity");
  }
  for (int j = 0; j < lp.num_vars(); ++j) {
    const std::string name = j < static_cast<int>(var_names.size()) ? var_names[j] : "x" + std::to_string(j);
    r.update(std::abs(std::min(x[j], d[j])), name + " stationarity");
  }
  return r;
}

}  // namespace ehaileq
