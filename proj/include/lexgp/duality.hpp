#pragma once

// Dual program of a single GP stage: weight layout, normality and
// orthogonality system, the product-form dual function and its maximization.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lexgp/error.hpp"
#include "lexgp/linalg.hpp"
#include "lexgp/posy_core.hpp"

namespace lexgp {

/// Where a dual weight lives: block 0 is the objective, block i >= 1 is
/// constraint i of the stage.
struct WeightSlot {
  std::size_t block = 0;
  std::size_t term = 0;
};

struct DualProgram {
  GPStage stage;
  std::vector<WeightSlot> layout;
  std::vector<std::size_t> block_offsets;  // block b spans [block_offsets[b], block_offsets[b + 1])
  MatrixXd equality_matrix;                // row 0 normality, rows 1..n orthogonality
  VectorXd equality_rhs;
  VectorXd coeffs;

  Index num_weights() const noexcept { return static_cast<Index>(layout.size()); }
  std::size_t num_blocks() const noexcept { return block_offsets.empty() ? 0 : block_offsets.size() - 1; }
  std::size_t num_constraints() const noexcept { return num_blocks() == 0 ? 0 : num_blocks() - 1; }
  Index index_of(std::size_t block, std::size_t term) const {
    return static_cast<Index>(block_offsets.at(block) + term);
  }
};

enum class DualMethod { LinearExact, ConcaveMax };

inline const char* to_string(DualMethod m) {
  return m == DualMethod::LinearExact ? "linear_exact" : "concave_max";
}

struct DualSolution {
  VectorXd w;
  double value = 0.0;
  VectorXd lambda;  // u_i, one per constraint block
  double residual = 0.0;
  DualMethod method = DualMethod::LinearExact;
  int iterations = 0;
  double projected_gradient_norm = 0.0;
};

struct DualOptions {
  double linear_tol = 1e-10;
  double optimality_tol = 1e-11;
  int max_iterations = 10000;
  std::optional<DualMethod> force_method;
};

/// Raised when the ascent hits its iteration cap; carries the best iterate.
class DualIterationLimit : public Error {
 public:
  DualIterationLimit(const std::string& what, DualSolution best)
      : Error(ErrorCode::IterationLimit, what), best_(std::move(best)) {}
  const DualSolution& best() const noexcept { return best_; }

 private:
  DualSolution best_;
};

inline DualProgram build_dual(const GPStage& s) {
  DualProgram d;
  d.stage = s;
  const Index n = s.n;
  const Index total = static_cast<Index>(s.num_terms());
  d.equality_matrix = MatrixXd::Zero(n + 1, total);
  d.equality_rhs = VectorXd::Zero(n + 1);
  d.equality_rhs(0) = 1.0;
  d.coeffs.resize(total);

  Index col = 0;
  auto add_block = [&](const Posynomial& p, std::size_t block) {
    d.block_offsets.push_back(static_cast<std::size_t>(col));
    for (std::size_t t = 0; t < p.size(); ++t, ++col) {
      d.layout.push_back(WeightSlot{block, t});
      d.coeffs(col) = p[t].coeff;
      d.equality_matrix.block(1, col, n, 1) = p[t].exponents;
      if (block == 0) d.equality_matrix(0, col) = 1.0;
    }
  };
  add_block(s.objective, 0);
  for (std::size_t i = 0; i < s.constraints.size(); ++i) add_block(s.constraints[i], i + 1);
  d.block_offsets.push_back(static_cast<std::size_t>(col));
  return d;
}

/// Per-constraint weight sums u_i.
inline VectorXd block_sums(const DualProgram& d, const VectorXd& w) {
  VectorXd u = VectorXd::Zero(static_cast<Index>(d.num_constraints()));
  for (std::size_t b = 1; b < d.num_blocks(); ++b)
    for (std::size_t k = d.block_offsets[b]; k < d.block_offsets[b + 1]; ++k)
      u(static_cast<Index>(b - 1)) += w(static_cast<Index>(k));
  return u;
}

/// ln V(w) = sum_t w_t ln(c_t / w_t) + sum_i u_i ln u_i, with 0 ln 0 = 0.
inline double log_dual(const DualProgram& d, const VectorXd& w) {
  if (w.size() != d.num_weights())
    throw Error(ErrorCode::DimensionMismatch, "dual vector has wrong length");
  double total = 0.0;
  for (Index t = 0; t < w.size(); ++t) {
    if (w(t) < 0.0 || !std::isfinite(w(t)))
      throw Error(ErrorCode::NonpositiveValue, "dual weight " + std::to_string(t) + " is negative");
    if (w(t) > 0.0) total += w(t) * std::log(d.coeffs(t) / w(t));
  }
  const VectorXd u = block_sums(d, w);
  for (Index i = 0; i < u.size(); ++i)
    if (u(i) > 0.0) total += u(i) * std::log(u(i));
  return total;
}

inline double eval_dual(const DualProgram& d, const VectorXd& w) { return std::exp(log_dual(d, w)); }

/// Analytic gradient of ln V at a strictly positive w.
inline VectorXd eval_log_dual_gradient(const DualProgram& d, const VectorXd& w) {
  if (w.size() != d.num_weights())
    throw Error(ErrorCode::DimensionMismatch, "dual vector has wrong length");
  for (Index t = 0; t < w.size(); ++t)
    if (!(w(t) > 0.0)) throw Error(ErrorCode::NonpositiveValue, "gradient needs strictly positive weights");
  const VectorXd u = block_sums(d, w);
  VectorXd g(w.size());
  for (Index t = 0; t < w.size(); ++t) {
    const std::size_t block = d.layout[static_cast<std::size_t>(t)].block;
    if (block == 0)
      g(t) = std::log(d.coeffs(t) / w(t)) - 1.0;
    else
      g(t) = std::log(d.coeffs(t) * u(static_cast<Index>(block - 1)) / w(t));
  }
  return g;
}

namespace detail {

// Weights at or below this are treated as this value when forming ascent
// derivatives; ln V has an infinite slope at zero for most terms.
inline constexpr double kWeightFloor = 1e-14;

inline VectorXd floored(const VectorXd& w) { return w.cwiseMax(kWeightFloor); }

inline VectorXd ascent_gradient(const DualProgram& d, const VectorXd& w) {
  return eval_log_dual_gradient(d, floored(w));
}

/// Hessian of ln V at the floored point: -1/w_t on the diagonal plus 1/u_i
/// over every pair inside constraint block i.
inline MatrixXd ascent_hessian(const DualProgram& d, const VectorXd& w) {
  const VectorXd wf = floored(w);
  const VectorXd u = block_sums(d, wf);
  const Index total = w.size();
  MatrixXd h = MatrixXd::Zero(total, total);
  for (Index t = 0; t < total; ++t) h(t, t) = -1.0 / wf(t);
  for (std::size_t b = 1; b < d.num_blocks(); ++b) {
    const double inv = 1.0 / u(static_cast<Index>(b - 1));
    for (std::size_t r = d.block_offsets[b]; r < d.block_offsets[b + 1]; ++r)
      for (std::size_t c = d.block_offsets[b]; c < d.block_offsets[b + 1]; ++c)
        h(static_cast<Index>(r), static_cast<Index>(c)) += inv;
  }
  return h;
}

inline MatrixXd select_columns(const MatrixXd& m, const std::vector<Index>& cols) {
  MatrixXd out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = m.col(cols[k]);
  return out;
}

/// Projection of g onto the tangent cone {d : E d = 0, d_t >= 0 for fixed t}.
/// With Z an orthonormal kernel basis of E, the cone is {Z c : Z_W c >= 0};
/// its projection is found from the dual NNLS min_{l >= 0} ||Z_W^T l + Z^T g||.
inline VectorXd tangent_cone_projection(const MatrixXd& e, const std::vector<bool>& fixed, const VectorXd& g) {
  const MatrixXd z = kernel_basis(e, rank(e));
  if (z.cols() == 0) return VectorXd::Zero(g.size());
  const VectorXd r = z.transpose() * g;
  std::vector<Index> rows;
  for (Index t = 0; t < g.size(); ++t)
    if (fixed[static_cast<std::size_t>(t)]) rows.push_back(t);
  VectorXd c = r;
  if (!rows.empty()) {
    MatrixXd zw(static_cast<Index>(rows.size()), z.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) zw.row(static_cast<Index>(k)) = z.row(rows[k]);
    const VectorXd lambda = nnls(zw.transpose(), -r);
    c = r + zw.transpose() * lambda;
  }
  VectorXd d = z * c;
  for (Index t = 0; t < g.size(); ++t)
    if (fixed[static_cast<std::size_t>(t)] && d(t) < 0.0) d(t) = 0.0;
  return d;
}

inline DualSolution finish(const DualProgram& d, VectorXd w, DualMethod method, int iterations, double pg) {
  DualSolution sol;
  const double floor = kWeightFloor * std::max(1.0, w.cwiseAbs().maxCoeff());
  for (Index t = 0; t < w.size(); ++t)
    if (w(t) <= floor) w(t) = 0.0;
  sol.residual = (d.equality_matrix * w - d.equality_rhs).cwiseAbs().maxCoeff();
  sol.w = std::move(w);
  sol.value = eval_dual(d, sol.w);
  sol.lambda = block_sums(d, sol.w);
  sol.method = method;
  sol.iterations = iterations;
  sol.projected_gradient_norm = pg;
  return sol;
}

inline DualSolution solve_dual_linear(const DualProgram& d, const DualOptions& opt) {
  const MatrixXd& e = d.equality_matrix;
  const VectorXd w = e.completeOrthogonalDecomposition().solve(d.equality_rhs);
  const double residual = (e * w - d.equality_rhs).cwiseAbs().maxCoeff();
  if (residual > opt.linear_tol * std::max(1.0, e.cwiseAbs().maxCoeff()) * 1e2)
    throw Error(ErrorCode::Infeasible, "normality and orthogonality conditions are inconsistent");
  if (w.minCoeff() < -opt.linear_tol)
    throw Error(ErrorCode::Infeasible,
                "the only solution of the dual constraints has a negative weight; the primal infimum is not attained");
  return finish(d, w, DualMethod::LinearExact, 0, 0.0);
}

/// Active-set ascent on the concave ln V over {E w = b, w >= 0}.
///
/// A working set W holds weights fixed at zero. On the face of free weights
/// the direction is a damped Newton step in an orthonormal basis of the
/// face's kernel; the step is capped by a ratio test and shortened by
/// Armijo backtracking. When the projected gradient on the face vanishes, the
/// fixed weight with the largest positive multiplier is released, provided
/// the released face admits an increase of that weight.
inline DualSolution solve_dual_concave(const DualProgram& d, const DualOptions& opt) {
  const MatrixXd& e = d.equality_matrix;
  const VectorXd& b = d.equality_rhs;
  const Index total = d.num_weights();

  VectorXd w = nnls(e, b);
  const double feas = (e * w - b).cwiseAbs().maxCoeff();
  if (feas > 1e-8)
    throw Error(ErrorCode::Infeasible,
                "no nonnegative weights satisfy the normality and orthogonality conditions (residual " +
                    std::to_string(feas) + ")");

  std::vector<bool> fixed(static_cast<std::size_t>(total));
  for (Index t = 0; t < total; ++t) fixed[static_cast<std::size_t>(t)] = (w(t) <= 0.0);
  for (Index t = 0; t < total; ++t)
    if (w(t) <= 0.0) w(t) = 0.0;

  auto free_indices = [&](const std::vector<bool>& fx) {
    std::vector<Index> idx;
    for (Index t = 0; t < total; ++t)
      if (!fx[static_cast<std::size_t>(t)]) idx.push_back(t);
    return idx;
  };

  // Orthonormal basis (in full coordinates) of directions that keep E w = b
  // and leave fixed weights at zero.
  auto face_basis = [&](const std::vector<Index>& idx) -> MatrixXd {
    if (idx.empty()) return MatrixXd(total, 0);
    const MatrixXd ef = select_columns(e, idx);
    const MatrixXd z = kernel_basis(ef, rank(ef));
    MatrixXd full = MatrixXd::Zero(total, z.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) full.row(idx[k]) = z.row(static_cast<Index>(k));
    return full;
  };

  double f = log_dual(d, w);
  auto try_direction = [&](const VectorXd& dvec, const VectorXd& grad) -> bool {
    double alpha_max = std::numeric_limits<double>::infinity();
    Index blocking = -1;
    for (Index t = 0; t < total; ++t) {
      if (fixed[static_cast<std::size_t>(t)] || dvec(t) >= 0.0) continue;
      const double a = w(t) / -dvec(t);
      if (a < alpha_max) {
        alpha_max = a;
        blocking = t;
      }
    }
    const double slope = grad.dot(dvec);
    double alpha = std::min(1.0, alpha_max);
    for (int bt = 0; bt < 80; ++bt, alpha *= 0.5) {
      VectorXd trial = w + alpha * dvec;
      const bool hits = blocking >= 0 && alpha >= alpha_max;
      if (hits) trial(blocking) = 0.0;
      trial = trial.cwiseMax(0.0);
      if (trial == w) return false;  // step below rounding; nothing to gain
      const double ft = log_dual(d, trial);
      if (ft >= f + 1e-4 * alpha * slope || (hits && ft >= f)) {
        w = std::move(trial);
        f = ft;
        if (hits) fixed[static_cast<std::size_t>(blocking)] = true;
        for (Index t = 0; t < total; ++t)
          if (w(t) == 0.0) fixed[static_cast<std::size_t>(t)] = true;
        return true;
      }
    }
    return false;
  };

  // Near a well-scaled optimum ln V can be flat to rounding while the
  // gradient is still measurably nonzero; accept an interior Newton step
  // when it shrinks the face gradient instead.
  auto newton_by_gradient = [&](const VectorXd& dvec, const MatrixXd& z, double current) -> bool {
    double alpha = 1.0;
    for (Index t = 0; t < total; ++t)
      if (!fixed[static_cast<std::size_t>(t)] && dvec(t) < 0.0) alpha = std::min(alpha, 0.9 * w(t) / -dvec(t));
    const VectorXd trial = w + alpha * dvec;
    if (!(alpha > 0.0) || trial.minCoeff() < 0.0) return false;
    const double next = (z * (z.transpose() * ascent_gradient(d, trial))).cwiseAbs().maxCoeff();
    if (!(next < 0.5 * current)) return false;
    w = trial;
    f = log_dual(d, w);
    return true;
  };

  double pg_norm = 0.0;
  const double tol = opt.optimality_tol;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::vector<Index> idx = free_indices(fixed);
    MatrixXd z = face_basis(idx);
    const VectorXd g = ascent_gradient(d, w);
    VectorXd reduced = z.transpose() * g;
    VectorXd p = z * reduced;
    // Recovery sums the log-ratio conditions weighted by w, so the stopping
    // test is scaled by the largest weight.
    const double scale = std::max(1.0, w.maxCoeff());
    pg_norm = p.size() ? p.cwiseAbs().maxCoeff() * scale : 0.0;

    if (pg_norm <= tol) {
      // Face optimum. Project the gradient onto the tangent cone of the
      // polytope at w; fixed weights with a positive component are released
      // together and the cone direction itself is the next step.
      const VectorXd cone = tangent_cone_projection(e, fixed, g);
      const double cone_norm = cone.cwiseAbs().maxCoeff() * scale;
      if (cone_norm <= tol) return finish(d, w, DualMethod::ConcaveMax, iter, cone_norm);
      bool released = false;
      for (Index t = 0; t < total; ++t) {
        if (fixed[static_cast<std::size_t>(t)] && cone(t) > 1e-12 * cone_norm) {
          fixed[static_cast<std::size_t>(t)] = false;
          released = true;
        }
      }
      if (!released || !try_direction(cone, g)) {
        pg_norm = cone_norm;
        if (cone_norm <= std::sqrt(tol)) return finish(d, w, DualMethod::ConcaveMax, iter, cone_norm);
        throw DualIterationLimit("dual ascent stalled at a vertex with cone gradient " + std::to_string(cone_norm),
                                 finish(d, w, DualMethod::ConcaveMax, iter, cone_norm));
      }
      continue;
    }

    // Damped Newton direction on the face.
    const MatrixXd h = ascent_hessian(d, w);
    const MatrixXd neg_m = -(z.transpose() * h * z);
    const double damping = 1e-10 * std::max(1.0, neg_m.diagonal().cwiseAbs().maxCoeff());
    const MatrixXd lhs = neg_m + damping * MatrixXd::Identity(z.cols(), z.cols());
    VectorXd dir = z * lhs.ldlt().solve(reduced);
    if (!dir.allFinite() || g.dot(dir) <= 0.0) dir = p;

    // Once the predicted gain is below the rounding level of ln V, function
    // values cannot rank steps and the gradient test goes first.
    const bool flat = g.dot(dir) < 1e-12 * std::max(1.0, std::abs(f));
    bool moved = flat && newton_by_gradient(dir, z, pg_norm / scale);
    if (!moved) moved = try_direction(dir, g) || try_direction(p, g) || (!flat && newton_by_gradient(dir, z, pg_norm / scale));
    if (!moved) {
      // No ascent possible at working precision.
      if (pg_norm <= std::sqrt(tol)) return finish(d, w, DualMethod::ConcaveMax, iter, pg_norm);
      throw DualIterationLimit("dual ascent stalled with projected gradient " + std::to_string(pg_norm),
                               finish(d, w, DualMethod::ConcaveMax, iter, pg_norm));
    }
    if (w.cwiseAbs().maxCoeff() > 1e12)
      throw Error(ErrorCode::Infeasible, "dual function is unbounded above; the primal constraints are inconsistent");
  }
  throw DualIterationLimit("dual ascent reached the iteration cap",
                           finish(d, w, DualMethod::ConcaveMax, opt.max_iterations, pg_norm));
}

}  // namespace detail

/// Maximizes V over nonnegative weights satisfying normality and
/// orthogonality. When that system pins down a single point it is solved
/// directly; otherwise the concave ln V is maximized over the feasible
/// polytope.
inline DualSolution solve_dual(const DualProgram& d, const DualOptions& opt = {}) {
  const bool determined = rank(d.equality_matrix) == d.num_weights();
  DualMethod method = determined ? DualMethod::LinearExact : DualMethod::ConcaveMax;
  if (opt.force_method) {
    if (*opt.force_method == DualMethod::LinearExact && !determined)
      throw Error(ErrorCode::InvalidInput, "linear dual path requested but the dual constraints do not fix w");
    method = *opt.force_method;
  }
  return method == DualMethod::LinearExact ? detail::solve_dual_linear(d, opt) : detail::solve_dual_concave(d, opt);
}

}  // namespace lexgp
