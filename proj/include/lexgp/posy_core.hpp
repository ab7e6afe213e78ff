#pragma once

// Posynomial model: terms, posynomials, constraints, the lexicographic
// problem, single-objective stages, and the lexicographic vector order.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lexgp/error.hpp"
#include "lexgp/linalg.hpp"

namespace lexgp {

/// One monomial c * prod_j x_j^a_j. The coefficient must be positive.
struct Term {
  double coeff = 1.0;
  VectorXd exponents;
};

/// A nonempty sum of terms over a fixed number of variables. Term order is
/// declaration order; it fixes the indexing of the corresponding dual weights.
class Posynomial {
 public:
  Posynomial() = default;

  explicit Posynomial(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw Error(ErrorCode::InvalidInput, "posynomial needs at least one term");
    const Index n = terms_.front().exponents.size();
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      const Term& term = terms_[t];
      if (!(term.coeff > 0.0) || !std::isfinite(term.coeff))
        throw Error(ErrorCode::NonpositiveCoefficient,
                    "term " + std::to_string(t) + " has coefficient " + std::to_string(term.coeff));
      if (term.exponents.size() != n)
        throw Error(ErrorCode::ExponentLengthMismatch,
                    "term " + std::to_string(t) + " has " + std::to_string(term.exponents.size()) +
                        " exponents, expected " + std::to_string(n));
      if (!term.exponents.allFinite())
        throw Error(ErrorCode::InvalidInput, "term " + std::to_string(t) + " has a non-finite exponent");
    }
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  Index num_variables() const noexcept { return terms_.empty() ? 0 : terms_.front().exponents.size(); }

  const Term& operator[](std::size_t t) const { return terms_[t]; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  auto begin() const noexcept { return terms_.begin(); }
  auto end() const noexcept { return terms_.end(); }

  /// Every coefficient multiplied by `factor` (> 0).
  Posynomial scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
      throw Error(ErrorCode::NonpositiveValue, "scale factor must be positive and finite");
    std::vector<Term> out = terms_;
    for (Term& t : out) t.coeff *= factor;
    return Posynomial(std::move(out));
  }

 private:
  std::vector<Term> terms_;
};

inline Posynomial monomial(double coeff, VectorXd exponents) {
  return Posynomial({Term{coeff, std::move(exponents)}});
}

/// lhs(x) <= bound, with bound > 0.
struct Constraint {
  Posynomial lhs;
  double bound = 1.0;

  Constraint() = default;
  Constraint(Posynomial l, double b) : lhs(std::move(l)), bound(b) {
    if (!(bound > 0.0) || !std::isfinite(bound))
      throw Error(ErrorCode::NonpositiveBound, "constraint bound must be positive, got " + std::to_string(bound));
  }
};

/// Priority-ordered objectives sharing one constraint set. objectives[0] has
/// the highest priority.
struct LexGPProblem {
  std::vector<std::string> variable_names;
  std::vector<std::string> objective_names;
  std::vector<Posynomial> objectives;
  std::vector<Constraint> constraints;

  LexGPProblem() = default;
  LexGPProblem(std::vector<std::string> vars, std::vector<Posynomial> objs, std::vector<Constraint> cons,
               std::vector<std::string> obj_names = {})
      : variable_names(std::move(vars)),
        objective_names(std::move(obj_names)),
        objectives(std::move(objs)),
        constraints(std::move(cons)) {
    validate();
  }

  Index num_variables() const noexcept { return static_cast<Index>(variable_names.size()); }

  void validate() {
    if (variable_names.empty()) throw Error(ErrorCode::InvalidInput, "problem needs at least one variable");
    if (objectives.empty()) throw Error(ErrorCode::EmptyObjectives, "problem needs at least one objective");
    const Index n = num_variables();
    for (std::size_t k = 0; k < objectives.size(); ++k)
      if (objectives[k].num_variables() != n)
        throw Error(ErrorCode::ExponentLengthMismatch, "objective " + std::to_string(k) + " is not over " +
                                                            std::to_string(n) + " variables");
    for (std::size_t i = 0; i < constraints.size(); ++i)
      if (constraints[i].lhs.num_variables() != n)
        throw Error(ErrorCode::ExponentLengthMismatch, "constraint " + std::to_string(i) + " is not over " +
                                                            std::to_string(n) + " variables");
    if (objective_names.empty())
      for (std::size_t k = 0; k < objectives.size(); ++k) objective_names.push_back("g" + std::to_string(k + 1));
    if (objective_names.size() != objectives.size())
      throw Error(ErrorCode::InvalidInput, "objective name count does not match objective count");
  }
};

/// One objective plus normalized constraints (each read as g_i(x) <= 1).
struct GPStage {
  Posynomial objective;
  std::vector<Posynomial> constraints;
  std::vector<std::string> constraint_labels;
  Index n = 0;

  GPStage() = default;
  GPStage(Posynomial obj, std::vector<Posynomial> cons, std::vector<std::string> labels = {})
      : objective(std::move(obj)), constraints(std::move(cons)), constraint_labels(std::move(labels)) {
    n = objective.num_variables();
    if (n == 0) throw Error(ErrorCode::InvalidInput, "a stage needs at least one variable");
    for (std::size_t i = 0; i < constraints.size(); ++i)
      if (constraints[i].num_variables() != n)
        throw Error(ErrorCode::DimensionMismatch, "stage constraint " + std::to_string(i) + " has wrong dimension");
    if (constraint_labels.empty())
      for (std::size_t i = 0; i < constraints.size(); ++i) constraint_labels.push_back("c" + std::to_string(i + 1));
    if (constraint_labels.size() != constraints.size())
      throw Error(ErrorCode::InvalidInput, "constraint label count does not match constraint count");
  }

  std::size_t num_terms() const noexcept {
    std::size_t total = objective.size();
    for (const auto& c : constraints) total += c.size();
    return total;
  }
};

enum class LexOrdering { Less, Equal, Greater };

inline const char* to_string(LexOrdering o) {
  switch (o) {
    case LexOrdering::Less: return "Less";
    case LexOrdering::Equal: return "Equal";
    case LexOrdering::Greater: return "Greater";
  }
  return "?";
}

namespace detail {

inline void require_positive_point(const VectorXd& x, Index n) {
  if (x.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "point has " + std::to_string(x.size()) + " components, expected " + std::to_string(n));
  for (Index j = 0; j < n; ++j)
    if (!(x(j) > 0.0) || !std::isfinite(x(j)))
      throw Error(ErrorCode::NonpositiveValue, "component " + std::to_string(j) + " of x is not strictly positive");
}

}  // namespace detail

/// sum_t c_t prod_j x_j^a_tj at a strictly positive point.
inline double eval(const Posynomial& p, const VectorXd& x) {
  detail::require_positive_point(x, p.num_variables());
  double total = 0.0;
  for (const Term& t : p) {
    double v = t.coeff;
    for (Index j = 0; j < x.size(); ++j)
      if (t.exponents(j) != 0.0) v *= std::pow(x(j), t.exponents(j));
    total += v;
  }
  return total;
}

struct LogEval {
  double value = 0.0;
  VectorXd gradient;
};

/// g(e^z) and its gradient with respect to z. Inner products are shifted by
/// their maximum before exponentiating.
inline LogEval eval_log(const Posynomial& p, const VectorXd& z) {
  const Index n = p.num_variables();
  if (z.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "z has " + std::to_string(z.size()) + " components, expected " + std::to_string(n));
  std::vector<double> s(p.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < p.size(); ++t) {
    s[t] = std::log(p[t].coeff) + p[t].exponents.dot(z);
    shift = std::max(shift, s[t]);
  }
  double sum = 0.0;
  VectorXd grad = VectorXd::Zero(n);
  for (std::size_t t = 0; t < p.size(); ++t) {
    const double e = std::exp(s[t] - shift);
    sum += e;
    grad += e * p[t].exponents;
  }
  const double scale = std::exp(shift);
  return LogEval{scale * sum, scale * grad};
}

/// lhs / bound, so that lhs(x) <= bound iff result(x) <= 1.
inline Posynomial normalize(const Constraint& c) {
  if (!(c.bound > 0.0)) throw Error(ErrorCode::NonpositiveBound, "cannot normalize against a nonpositive bound");
  return c.lhs.scaled(1.0 / c.bound);
}

/// T x n matrix of term exponents: objective terms first, then each
/// constraint's terms in declaration order.
inline MatrixXd exponent_matrix(const GPStage& s) {
  MatrixXd a(static_cast<Index>(s.num_terms()), s.n);
  Index row = 0;
  for (const Term& t : s.objective) a.row(row++) = t.exponents.transpose();
  for (const auto& c : s.constraints)
    for (const Term& t : c) a.row(row++) = t.exponents.transpose();
  return a;
}

/// T - n - 1. Negative values mean an overdetermined dual system; callers
/// are expected to surface that as a warning.
inline int degree_of_difficulty(const GPStage& s) {
  if (s.n <= 0) throw Error(ErrorCode::InvalidInput, "degree of difficulty needs at least one variable");
  return static_cast<int>(s.num_terms()) - static_cast<int>(s.n) - 1;
}

/// First component of u - v whose magnitude exceeds `tol` decides.
inline LexOrdering lex_compare(const VectorXd& u, const VectorXd& v, double tol = 1e-9) {
  if (u.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "lex_compare on vectors of different length");
  for (Index j = 0; j < u.size(); ++j) {
    const double d = u(j) - v(j);
    if (d > tol) return LexOrdering::Greater;
    if (d < -tol) return LexOrdering::Less;
  }
  return LexOrdering::Equal;
}

/// The stage for objective k under the problem's original constraints only.
inline GPStage independent_stage(const LexGPProblem& p, std::size_t k) {
  if (k >= p.objectives.size()) throw Error(ErrorCode::InvalidInput, "objective index out of range");
  std::vector<Posynomial> cons;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    cons.push_back(normalize(p.constraints[i]));
    labels.push_back("c" + std::to_string(i + 1));
  }
  return GPStage(p.objectives[k], std::move(cons), std::move(labels));
}

}  // namespace lexgp
