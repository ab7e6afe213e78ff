#pragma once

// Primal recovery from a maximizing dual vector: each active term satisfies
// a log-linear equation in z = ln x, and the rank of that system decides
// whether the optimum is unique.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lexgp/duality.hpp"
#include "lexgp/error.hpp"
#include "lexgp/linalg.hpp"
#include "lexgp/posy_core.hpp"

namespace lexgp {

struct LogLinearSystem {
  MatrixXd matrix;                                // one exponent row per active term
  VectorXd rhs;                                   // gamma = ln(beta)
  std::vector<std::size_t> active_constraints;    // 0-based stage constraint indices
  std::vector<Index> row_terms;                   // flat dual index of each row
};

struct PrimalReport {
  VectorXd x;
  VectorXd z;
  bool unique = true;
  Index rank = 0;
  Index optimal_set_dimension = 0;
  MatrixXd nullspace;  // n x optimal_set_dimension, orthonormal columns
  double objective_value = 0.0;
  double system_residual = 0.0;
  double consistency_residual = 0.0;
  double duality_gap = 0.0;
  double feasibility_margin = 0.0;  // max_i g_i(x) - 1; 0 when the stage has no constraints
};

struct RecoveryOptions {
  double consistency_tol = 1e-6;
  double feasibility_tol = 1e-8;
  double rank_tol = 1e-9;
};

inline LogLinearSystem build_log_linear_system(const GPStage& s, const DualSolution& sol,
                                               double activity_tol = 1e-8) {
  if (!(sol.value > 0.0)) throw Error(ErrorCode::InvalidInput, "dual value must be positive");
  if (!(activity_tol > 0.0)) throw Error(ErrorCode::InvalidInput, "activity threshold must be positive");
  if (sol.w.size() != static_cast<Index>(s.num_terms()))
    throw Error(ErrorCode::DimensionMismatch, "dual vector does not match the stage's term count");

  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  LogLinearSystem sys;
  Index flat = 0;
  for (std::size_t t = 0; t < s.objective.size(); ++t, ++flat) {
    const double wt = sol.w(flat);
    if (wt <= activity_tol) continue;
    rows.push_back(s.objective[t].exponents);
    rhs.push_back(std::log(wt * sol.value / s.objective[t].coeff));
    sys.row_terms.push_back(flat);
  }
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const Posynomial& g = s.constraints[i];
    double u = 0.0;
    for (std::size_t t = 0; t < g.size(); ++t) u += sol.w(flat + static_cast<Index>(t));
    if (u > activity_tol) {
      sys.active_constraints.push_back(i);
      for (std::size_t t = 0; t < g.size(); ++t) {
        const double wt = sol.w(flat + static_cast<Index>(t));
        if (wt <= activity_tol) continue;
        rows.push_back(g[t].exponents);
        rhs.push_back(std::log(wt / (g[t].coeff * u)));
        sys.row_terms.push_back(flat + static_cast<Index>(t));
      }
    }
    flat += static_cast<Index>(g.size());
  }
  if (rows.empty()) throw Error(ErrorCode::DegenerateDual, "every dual weight is below the activity threshold");

  sys.matrix.resize(static_cast<Index>(rows.size()), s.n);
  sys.rhs.resize(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sys.matrix.row(static_cast<Index>(r)) = rows[r].transpose();
    sys.rhs(static_cast<Index>(r)) = rhs[r];
  }
  return sys;
}

/// Term-to-posynomial ratios at x. Constraint blocks are scaled by the
/// matching entry of `u` when it is given.
struct PrimalWeights {
  VectorXd objective;
  std::vector<VectorXd> constraints;

  VectorXd flat() const {
    Index total = objective.size();
    for (const auto& c : constraints) total += c.size();
    VectorXd out(total);
    out.head(objective.size()) = objective;
    Index at = objective.size();
    for (const auto& c : constraints) {
      out.segment(at, c.size()) = c;
      at += c.size();
    }
    return out;
  }
};

inline VectorXd term_ratios(const Posynomial& p, const VectorXd& x) {
  VectorXd r(static_cast<Index>(p.size()));
  for (std::size_t t = 0; t < p.size(); ++t) r(static_cast<Index>(t)) = eval(Posynomial({p[t]}), x);
  return r / r.sum();
}

inline PrimalWeights weights_from_primal(const GPStage& s, const VectorXd& x,
                                         const std::optional<VectorXd>& u = std::nullopt) {
  detail::require_positive_point(x, s.n);
  if (u && u->size() != static_cast<Index>(s.constraints.size()))
    throw Error(ErrorCode::DimensionMismatch, "constraint activity vector has wrong length");
  PrimalWeights pw;
  pw.objective = term_ratios(s.objective, x);
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    VectorXd r = term_ratios(s.constraints[i], x);
    if (u) r *= (*u)(static_cast<Index>(i));
    pw.constraints.push_back(std::move(r));
  }
  return pw;
}

inline PrimalReport recover_primal(const LogLinearSystem& sys, const GPStage& s, const DualSolution& sol,
                                   const RecoveryOptions& opt = {}) {
  if (sys.matrix.rows() == 0) throw Error(ErrorCode::DegenerateDual, "log-linear system is empty");
  if (sys.matrix.cols() != s.n) throw Error(ErrorCode::DimensionMismatch, "log-linear system has wrong width");

  PrimalReport rep;
  rep.rank = rank(sys.matrix, opt.rank_tol);
  rep.optimal_set_dimension = s.n - rep.rank;
  rep.unique = rep.optimal_set_dimension == 0;
  rep.z = detail::min_norm_solve(sys.matrix, sys.rhs, rep.rank);
  rep.system_residual = (sys.matrix * rep.z - sys.rhs).cwiseAbs().maxCoeff();
  if (rep.system_residual > opt.consistency_tol)
    throw Error(ErrorCode::InconsistentSystem, "log-linear system residual " + std::to_string(rep.system_residual) +
                                                   " exceeds tolerance; the dual vector is not optimal");
  rep.nullspace = detail::kernel_basis(sys.matrix, rep.rank);
  rep.x = rep.z.array().exp().matrix();

  rep.objective_value = eval(s.objective, rep.x);
  rep.duality_gap = std::abs(rep.objective_value - sol.value) / std::max(1.0, sol.value);

  const VectorXd recomputed = weights_from_primal(s, rep.x, sol.lambda).flat();
  rep.consistency_residual = (recomputed - sol.w).cwiseAbs().maxCoeff();

  rep.feasibility_margin = s.constraints.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& g : s.constraints) rep.feasibility_margin = std::max(rep.feasibility_margin, eval(g, rep.x) - 1.0);
  if (rep.feasibility_margin > opt.feasibility_tol)
    throw Error(ErrorCode::InfeasibleRecovery,
                "recovered point violates a constraint by " + std::to_string(rep.feasibility_margin));
  return rep;
}

}  // namespace lexgp
