#pragma once

// Sequential preemptive procedure: minimize each objective in priority
// order, optionally carrying an upper bound on every already-minimized
// objective into the later stages.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lexgp/duality.hpp"
#include "lexgp/error.hpp"
#include "lexgp/posy_core.hpp"
#include "lexgp/primal_recovery.hpp"

namespace lexgp {

enum class LexMode {
  Strict,       // later stages keep g_k(x) <= g_k* (1 + eps) for every earlier k
  Independent,  // each objective solved under the original constraints only
};

inline const char* to_string(LexMode m) { return m == LexMode::Strict ? "strict" : "independent"; }

struct StageSolution {
  std::size_t stage_index = 0;  // 0-based priority position
  GPStage stage;
  DualSolution dual;
  PrimalReport primal;
  double objective_value = 0.0;
  std::optional<double> carried_bound;  // bound imposed on later stages, Strict mode only
  int degree_of_difficulty = 0;
};

struct LexSolution {
  LexMode mode = LexMode::Strict;
  double carry_eps = 0.0;
  std::vector<StageSolution> stages;
  VectorXd final_x;
  VectorXd objective_vector;
};

struct LexOptions {
  DualOptions dual;
  RecoveryOptions recovery;
  double activity_tol = 1e-8;
  std::optional<std::size_t> last_stage;  // stop after this 0-based stage
};

/// A stage failure, annotated with its priority index and every stage that
/// completed before it.
class LexStageError : public Error {
 public:
  LexStageError(const Error& cause, std::size_t stage, std::vector<StageSolution> partial)
      : Error(cause.code(), "stage " + std::to_string(stage + 1) + ": " + cause.what()),
        stage_(stage),
        partial_(std::move(partial)) {}

  std::size_t stage() const noexcept { return stage_; }
  const std::vector<StageSolution>& partial() const noexcept { return partial_; }

 private:
  std::size_t stage_;
  std::vector<StageSolution> partial_;
};

/// g(x) <= bound (1 + eps), an upper bound on an already-minimized objective.
inline Constraint carry_constraint(const Posynomial& g, double bound, double eps = 1e-6) {
  if (!(bound > 0.0) || !std::isfinite(bound))
    throw Error(ErrorCode::NonpositiveBound, "carried bound must be positive");
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidInput, "carry epsilon must be nonnegative");
  return Constraint(g, bound * (1.0 + eps));
}

inline VectorXd evaluate_objective_vector(const LexGPProblem& p, const VectorXd& x) {
  VectorXd out(static_cast<Index>(p.objectives.size()));
  for (std::size_t k = 0; k < p.objectives.size(); ++k) out(static_cast<Index>(k)) = eval(p.objectives[k], x);
  return out;
}

/// Stage k: objective k, the normalized original constraints, then (Strict
/// mode) one normalized carried constraint per earlier objective.
inline GPStage build_lex_stage(const LexGPProblem& p, std::size_t k, const std::vector<double>& carried_bounds) {
  GPStage base = independent_stage(p, k);
  for (std::size_t j = 0; j < carried_bounds.size(); ++j) {
    base.constraints.push_back(normalize(Constraint(p.objectives[j], carried_bounds[j])));
    base.constraint_labels.push_back("carry:" + p.objective_names[j]);
  }
  return base;
}

inline StageSolution solve_stage(const GPStage& stage, std::size_t index, const LexOptions& opt) {
  StageSolution out;
  out.stage_index = index;
  out.stage = stage;
  out.degree_of_difficulty = degree_of_difficulty(stage);
  const DualProgram dual = build_dual(stage);
  out.dual = solve_dual(dual, opt.dual);
  const LogLinearSystem sys = build_log_linear_system(stage, out.dual, opt.activity_tol);
  out.primal = recover_primal(sys, stage, out.dual, opt.recovery);
  out.objective_value = out.primal.objective_value;
  return out;
}

inline LexSolution solve_lexicographic(const LexGPProblem& p, LexMode mode, double eps = 1e-6,
                                       const LexOptions& opt = {}) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidInput, "carry epsilon must be nonnegative");
  LexSolution sol;
  sol.mode = mode;
  sol.carry_eps = eps;
  const std::size_t count =
      opt.last_stage ? std::min(*opt.last_stage + 1, p.objectives.size()) : p.objectives.size();

  std::vector<double> carried;
  for (std::size_t k = 0; k < count; ++k) {
    try {
      const GPStage stage = build_lex_stage(p, k, carried);
      StageSolution st = solve_stage(stage, k, opt);
      if (mode == LexMode::Strict && k + 1 < count) {
        const Constraint c = carry_constraint(p.objectives[k], st.objective_value, eps);
        st.carried_bound = c.bound;
        carried.push_back(c.bound);
      }
      sol.stages.push_back(std::move(st));
    } catch (const LexStageError&) {
      throw;
    } catch (const Error& err) {
      throw LexStageError(err, k, sol.stages);
    }
  }
  sol.final_x = sol.stages.back().primal.x;
  sol.objective_vector = evaluate_objective_vector(p, sol.final_x);
  return sol;
}

}  // namespace lexgp
