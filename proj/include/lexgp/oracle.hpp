#pragma once

// Independent check on the dual path: each stage is minimized directly as a
// smooth convex problem in z = ln x. Nothing here calls into the dual or
// recovery code, and term evaluation is reimplemented locally.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "lexgp/error.hpp"
#include "lexgp/posy_core.hpp"

namespace lexgp {

enum class OracleStatus { Converged, IterationLimit, UnboundedSuspected };

inline const char* to_string(OracleStatus s) {
  switch (s) {
    case OracleStatus::Converged: return "converged";
    case OracleStatus::IterationLimit: return "iteration_limit";
    case OracleStatus::UnboundedSuspected: return "unbounded_suspected";
  }
  return "?";
}

struct OracleResult {
  VectorXd z;
  VectorXd x;
  double value = 0.0;
  OracleStatus status = OracleStatus::IterationLimit;
  VectorXd constraint_margins;  // g_i(x) - 1
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct OracleOptions {
  double tol = 1e-8;
  int max_iter = 50000;
};

namespace oracle_detail {

/// ln g(e^z) for a posynomial stored as (ln c, exponent rows).
struct LogPosynomial {
  VectorXd log_coeff;
  MatrixXd exponents;  // terms x n

  explicit LogPosynomial(const Posynomial& p)
      : log_coeff(static_cast<Index>(p.size())), exponents(static_cast<Index>(p.size()), p.num_variables()) {
    for (std::size_t t = 0; t < p.size(); ++t) {
      log_coeff(static_cast<Index>(t)) = std::log(p[t].coeff);
      exponents.row(static_cast<Index>(t)) = p[t].exponents.transpose();
    }
  }

  double operator()(const VectorXd& z, VectorXd* grad) const {
    const VectorXd s = log_coeff + exponents * z;
    const double top = s.maxCoeff();
    const VectorXd e = (s.array() - top).exp().matrix();
    const double sum = e.sum();
    if (grad) *grad = exponents.transpose() * (e / sum);
    return top + std::log(sum);
  }
};

}  // namespace oracle_detail

/// Augmented-Lagrangian penalty for min ln g0 s.t. ln g_i <= 0:
///   ln g0(z) + 1/(2 rho) sum_i [max(0, l_i + rho ln g_i(z))^2 - l_i^2].
/// With all multipliers l_i = 0 this is the plain exterior quadratic penalty.
class PenalizedLogObjective {
 public:
  explicit PenalizedLogObjective(const GPStage& s) : objective_(s.objective) {
    for (const auto& c : s.constraints) constraints_.emplace_back(c);
    multipliers = VectorXd::Zero(static_cast<Index>(constraints_.size()));
  }

  double rho = 10.0;
  VectorXd multipliers;

  double operator()(const VectorXd& z, VectorXd* grad) const {
    VectorXd g;
    double value = objective_(z, grad ? &g : nullptr);
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
      VectorXd gi;
      const double ci = constraints_[i](z, grad ? &gi : nullptr);
      const double li = multipliers(static_cast<Index>(i));
      const double shifted = std::max(0.0, li + rho * ci);
      value += (shifted * shifted - li * li) / (2.0 * rho);
      if (grad && shifted > 0.0) g += shifted * gi;
    }
    if (grad) *grad = std::move(g);
    return value;
  }

  double log_objective(const VectorXd& z) const { return objective_(z, nullptr); }

  VectorXd log_constraints(const VectorXd& z) const {
    VectorXd c(static_cast<Index>(constraints_.size()));
    for (std::size_t i = 0; i < constraints_.size(); ++i) c(static_cast<Index>(i)) = constraints_[i](z, nullptr);
    return c;
  }

 private:
  oracle_detail::LogPosynomial objective_;
  std::vector<oracle_detail::LogPosynomial> constraints_;
};

/// Minimizes ln g0(e^z) subject to ln g_i(e^z) <= 0 from z = 0 by gradient
/// descent (Barzilai-Borwein trial steps, nonmonotone Armijo backtracking) on a penalty
/// whose weight grows while the violation stalls.
inline OracleResult solve_primal_log_space(const GPStage& s, double tol = 1e-8, int max_iter = 50000) {
  PenalizedLogObjective pen(s);
  const Index n = s.n;
  VectorXd z = VectorXd::Zero(n);
  VectorXd grad;
  double val = pen(z, &grad);

  OracleResult res;
  res.status = OracleStatus::IterationLimit;
  int iter = 0;
  double step = 1.0;
  double prev_violation = std::numeric_limits<double>::infinity();

  auto fill = [&](OracleStatus status) {
    res.z = z;
    res.x = z.array().exp().matrix();
    res.value = std::exp(pen.log_objective(z));
    res.constraint_margins = (pen.log_constraints(z).array().exp() - 1.0).matrix();
    res.status = status;
    res.iterations = iter;
    res.gradient_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    return res;
  };

  for (int outer = 0; outer < 200 && iter < max_iter; ++outer) {
    // Inner minimization at fixed penalty weight and multipliers. The
    // tolerance tightens with each outer round; the Armijo reference is the
    // largest of the last few accepted values.
    const double inner_tol = std::max(tol, std::pow(10.0, -2.0 - outer));
    VectorXd prev_z, prev_grad;
    std::deque<double> recent{val};
    while (iter < max_iter && grad.cwiseAbs().maxCoeff() > inner_tol) {
      if (prev_z.size()) {
        const VectorXd ds = z - prev_z, dg = grad - prev_grad;
        const double sy = ds.dot(dg);
        step = sy > 0.0 ? std::clamp(ds.squaredNorm() / sy, 1e-12, 1e6) : std::min(step * 4.0, 1e6);
      }
      const double slope = grad.squaredNorm();
      double alpha = step;
      VectorXd trial, trial_grad;
      double trial_val = val;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
        trial = z - alpha * grad;
        trial_val = pen(trial, &trial_grad);
        const double reference = *std::max_element(recent.begin(), recent.end());
        if (std::isfinite(trial_val) && trial_val <= reference - 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
      }
      ++iter;
      if (!accepted) break;
      const bool decreased = trial_val < val;
      prev_z = z;
      prev_grad = grad;
      z = trial;
      grad = trial_grad;
      val = trial_val;
      step = alpha;
      recent.push_back(val);
      if (recent.size() > 10) recent.pop_front();
      if (z.cwiseAbs().maxCoeff() > 50.0 && decreased) return fill(OracleStatus::UnboundedSuspected);
    }

    const VectorXd c = pen.log_constraints(z);
    const double violation = c.size() ? std::max(0.0, c.maxCoeff()) : 0.0;
    const VectorXd updated = (pen.multipliers + pen.rho * c).cwiseMax(0.0);
    double complementarity = 0.0;
    for (Index i = 0; i < c.size(); ++i)
      complementarity = std::max(complementarity, std::min(updated(i), std::abs(c(i))));
    const bool inner_ok = grad.cwiseAbs().maxCoeff() <= tol;
    if (inner_ok && violation <= 1e-9 && complementarity <= 1e-9) return fill(OracleStatus::Converged);
    if (iter >= max_iter) break;

    pen.multipliers = updated;
    if (violation > 0.25 * prev_violation) pen.rho = std::min(pen.rho * 10.0, 1e8);
    prev_violation = violation;
    val = pen(z, &grad);
  }
  return fill(OracleStatus::IterationLimit);
}

/// Seeded rejection sampling of points with ln x uniform in [-3, 3]^n that
/// satisfy every stage constraint.
inline std::vector<VectorXd> sample_feasible_points(const GPStage& s, int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::InvalidInput, "sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::vector<VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  constexpr long kMaxDraws = 1000000;
  VectorXd x(s.n);
  for (long draw = 0; draw < kMaxDraws && static_cast<int>(out.size()) < count; ++draw) {
    for (Index j = 0; j < s.n; ++j) x(j) = std::exp(coord(rng));
    bool ok = true;
    for (const auto& g : s.constraints)
      if (eval(g, x) > 1.0) {
        ok = false;
        break;
      }
    if (ok) out.push_back(x);
  }
  if (static_cast<int>(out.size()) < count)
    throw Error(ErrorCode::SamplerExhausted, "found only " + std::to_string(out.size()) + " of " +
                                                 std::to_string(count) + " feasible points");
  return out;
}

}  // namespace lexgp
