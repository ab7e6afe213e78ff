#pragma once

// Shared fixtures: the two-objective worked example, a classic
// zero-difficulty design problem, and a seeded random-stage generator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <random>
#include <vector>

#include "lexgp/duality.hpp"
#include "lexgp/lex_driver.hpp"
#include "lexgp/posy_core.hpp"
#include "lexgp/primal_recovery.hpp"

namespace lexgp::testing {

inline VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Posynomial g10() { return Posynomial({Term{1.0, vec({-1, -1, -2})}}); }
inline Posynomial g20() { return Posynomial({Term{1.0, vec({-1, -3, -5})}, Term{1.0, vec({-1, -1, 0})}}); }
inline Constraint c1() { return Constraint(Posynomial({Term{1.0, vec({1, 1, 2})}, Term{1.0, vec({0, 1, 1})}}), 10.0); }
inline Constraint c2() { return Constraint(Posynomial({Term{1.0, vec({1, 0, 1})}}), 2.0); }

inline LexGPProblem worked_example() {
  return LexGPProblem({"x1", "x2", "x3"}, {g10(), g20()}, {c1(), c2()}, {"g10", "g20"});
}

inline GPStage stage1() { return independent_stage(worked_example(), 0); }
inline GPStage stage2() { return independent_stage(worked_example(), 1); }

// Reported values for the worked example.
inline const VectorXd kStage1Weights = vec({1.0, 0.6666667, 0.3333333, 0.3333333});
inline const VectorXd kStage2Weights = vec({0.6666667, 0.3333333, 1.0, 1.3333333, 0.0});
inline const VectorXd kStage1ReportedX = vec({0.9086967, 1.514494, 2.200954});
inline const VectorXd kStage2ReportedX = vec({3.020273, 23.01163, 0.2483217});
inline constexpr double kStage1Value = 0.15;
inline constexpr double kStage2Value = 0.0431647;

/// Unconstrained box-cost problem 40/(lwh) + 40wh + 20lh + 10lw; its dual
/// constraints have the single solution (0.4, 0.2, 0.2, 0.2) with V = 100.
inline GPStage open_box_stage() {
  return GPStage(Posynomial({Term{40, vec({-1, -1, -1})}, Term{40, vec({0, 1, 1})}, Term{20, vec({1, 0, 1})},
                             Term{10, vec({1, 1, 0})}}),
                 {});
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Central differences of a scalar function of a vector.
inline VectorXd finite_difference(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h = 1e-6) {
  VectorXd g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    VectorXd hi = x, lo = x;
    hi(j) += h;
    lo(j) -= h;
    g(j) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline Posynomial random_posynomial(std::mt19937_64& rng, Index n, int terms) {
  std::uniform_int_distribution<int> expo(-3, 3);
  std::uniform_real_distribution<double> coeff(0.1, 10.0);
  std::vector<Term> out;
  for (int t = 0; t < terms; ++t) {
    VectorXd e(n);
    for (Index j = 0; j < n; ++j) e(j) = expo(rng);
    out.push_back(Term{coeff(rng), e});
  }
  return Posynomial(std::move(out));
}

/// A random stage with n <= 3, at most 6 terms and degree of difficulty
/// <= 2. No feasibility filtering happens here.
inline GPStage random_stage(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_n(1, 3);
  for (;;) {
    const Index n = pick_n(rng);
    std::uniform_int_distribution<int> obj_terms(1, 3), cons_count(0, 2), cons_terms(1, 2);
    const int to = obj_terms(rng);
    const int m = cons_count(rng);
    std::vector<int> tc;
    int total = to;
    for (int i = 0; i < m; ++i) {
      tc.push_back(cons_terms(rng));
      total += tc.back();
    }
    if (total > 6 || total - n - 1 > 2) continue;
    std::vector<Posynomial> cons;
    for (int i = 0; i < m; ++i) cons.push_back(random_posynomial(rng, n, tc[static_cast<std::size_t>(i)]));
    return GPStage(random_posynomial(rng, n, to), std::move(cons));
  }
}

struct SolvedStage {
  GPStage stage;
  DualSolution dual;
  PrimalReport primal;
};

/// Draws random stages until `count` of them have a dual optimum from which
/// a primal point can be recovered.
inline std::vector<SolvedStage> random_solvable_stages(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SolvedStage> out;
  while (static_cast<int>(out.size()) < count) {
    GPStage s = random_stage(rng);
    try {
      DualSolution d = solve_dual(build_dual(s));
      PrimalReport p = recover_primal(build_log_linear_system(s, d), s, d);
      out.push_back({std::move(s), std::move(d), std::move(p)});
    } catch (const Error&) {
    }
  }
  return out;
}

}  // namespace lexgp::testing
