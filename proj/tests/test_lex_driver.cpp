#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lexgp/lex_driver.hpp"

using namespace lexgp;
using namespace lexgp::testing;

TEST(CarryConstraint, NormalizedCoefficients) {
  const Posynomial n = normalize(carry_constraint(g10(), 0.15, 0.0));
  EXPECT_NEAR(n[0].coeff, 6.6667, 1e-4);
  EXPECT_EQ(n[0].exponents, vec({-1, -1, -2}));

  EXPECT_DOUBLE_EQ(normalize(carry_constraint(monomial(1.0, vec({1})), 1.0, 0.0))[0].coeff, 1.0);

  const Posynomial two = normalize(carry_constraint(Posynomial({Term{3.0, vec({1})}, Term{5.0, vec({2})}}), 2.0, 0.0));
  EXPECT_DOUBLE_EQ(two[0].coeff, 1.5);
  EXPECT_DOUBLE_EQ(two[1].coeff, 2.5);
}

TEST(CarryConstraint, SlackWidensTheBound) {
  EXPECT_DOUBLE_EQ(carry_constraint(g10(), 0.15, 1e-6).bound, 0.15 * (1 + 1e-6));
  EXPECT_THROW(carry_constraint(g10(), 0.0), Error);
  EXPECT_THROW(carry_constraint(g10(), 0.15, -1.0), Error);
}

TEST(ObjectiveVector, Examples) {
  const LexGPProblem p = worked_example();
  const VectorXd at2 = evaluate_objective_vector(p, kStage2ReportedX);
  EXPECT_NEAR(at2(0), 0.233333, 1e-4);
  EXPECT_NEAR(at2(1), 0.0431647, 1e-4);
  EXPECT_NEAR(evaluate_objective_vector(p, kStage1ReportedX)(0), 0.15, 1e-6);

  const LexGPProblem single({"x1", "x2", "x3"}, {g10()}, {c1(), c2()});
  EXPECT_EQ(evaluate_objective_vector(single, kStage1ReportedX).size(), 1);
}

TEST(BuildLexStage, CarriesEarlierObjectives) {
  const GPStage s = build_lex_stage(worked_example(), 1, {0.15});
  ASSERT_EQ(s.constraints.size(), 3u);
  EXPECT_EQ(s.constraint_labels.back(), "carry:g10");
  EXPECT_NEAR(s.constraints.back()[0].coeff, 1 / 0.15, 1e-12);
}

TEST(SolveLexicographic, IndependentReproducesReportedStages) {
  const LexSolution sol = solve_lexicographic(worked_example(), LexMode::Independent);
  ASSERT_EQ(sol.stages.size(), 2u);
  EXPECT_NEAR(sol.stages[0].dual.value, 0.15, 1e-6);
  EXPECT_NEAR(sol.stages[1].dual.value, kStage2Value, 1e-6);
  for (Index j = 0; j < 3; ++j) EXPECT_LE(relative_error(sol.final_x(j), kStage2ReportedX(j)), 1e-4);
  EXPECT_FALSE(sol.stages[0].carried_bound.has_value());
  EXPECT_EQ(sol.stages[0].stage.constraints.size(), 2u);
  EXPECT_EQ(sol.stages[1].stage.constraints.size(), 2u);
  EXPECT_NEAR(sol.objective_vector(0), 0.2333333, 1e-6);  // breaks the stage-1 optimum
}

TEST(SolveLexicographic, StrictKeepsTheFirstObjective) {
  const double eps = 1e-6;
  const LexSolution sol = solve_lexicographic(worked_example(), LexMode::Strict, eps);
  ASSERT_EQ(sol.stages.size(), 2u);
  ASSERT_TRUE(sol.stages[0].carried_bound.has_value());
  EXPECT_NEAR(*sol.stages[0].carried_bound, 0.15 * (1 + eps), 1e-9);
  EXPECT_FALSE(sol.stages[1].carried_bound.has_value());
  EXPECT_EQ(sol.stages[1].stage.constraints.size(), 3u);
  EXPECT_LE(sol.objective_vector(0), 0.15 * (1 + eps) + 1e-9);
  EXPECT_GE(sol.objective_vector(1), kStage2Value);
  // On the stage-1 optimal family x = (2/s, 10/(3s), s), g20 = 27/(2000 s) + 0.15 s^2,
  // minimized where s^3 = 0.045.
  const double s3 = std::cbrt(0.045);
  const double family_min = 27.0 / (2000.0 * s3) + 0.15 * s3 * s3;
  EXPECT_LE(relative_error(sol.objective_vector(1), family_min), 1e-5);
}

TEST(SolveLexicographic, SingleObjectiveModesAgree) {
  const LexGPProblem p({"x1", "x2", "x3"}, {g20()}, {c1(), c2()});
  const LexSolution a = solve_lexicographic(p, LexMode::Strict);
  const LexSolution b = solve_lexicographic(p, LexMode::Independent);
  ASSERT_EQ(a.stages.size(), 1u);
  EXPECT_EQ(a.final_x, b.final_x);
  EXPECT_EQ(a.stages[0].dual.value, b.stages[0].dual.value);
  EXPECT_FALSE(a.stages[0].carried_bound.has_value());
  EXPECT_NEAR(a.stages[0].dual.value, kStage2Value, 1e-6);
}

TEST(SolveLexicographic, LastStageStopsEarly) {
  LexOptions opt;
  opt.last_stage = 0;
  const LexSolution sol = solve_lexicographic(worked_example(), LexMode::Strict, 1e-6, opt);
  ASSERT_EQ(sol.stages.size(), 1u);
  EXPECT_FALSE(sol.stages[0].carried_bound.has_value());
  EXPECT_NEAR(sol.objective_vector(0), 0.15, 1e-6);
}

TEST(SolveLexicographic, FailureReportsStageAndPartialResults) {
  // The second objective (x1) has no attained minimum without constraints.
  const LexGPProblem p({"x1"}, {Posynomial({Term{1.0, vec({1})}, Term{1.0, vec({-1})}}), monomial(1.0, vec({1}))}, {});
  try {
    solve_lexicographic(p, LexMode::Independent);
    FAIL();
  } catch (const LexStageError& e) {
    EXPECT_EQ(e.stage(), 1u);
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    ASSERT_EQ(e.partial().size(), 1u);
    EXPECT_NEAR(e.partial()[0].objective_value, 2.0, 1e-9);
  }
}

TEST(SolveLexicographic, StrictRecoversCarriedPoint) {
  // x1 + 1/x1 then x1: the carried bound pins x1 near 1.
  const LexGPProblem p({"x1"}, {Posynomial({Term{1.0, vec({1})}, Term{1.0, vec({-1})}}), monomial(1.0, vec({1}))}, {});
  const LexSolution sol = solve_lexicographic(p, LexMode::Strict, 1e-6);
  EXPECT_LE(sol.objective_vector(0), 2.0 * (1 + 1e-6) + 1e-9);
  EXPECT_NEAR(sol.final_x(0), 1.0, 2e-3);
  EXPECT_LT(sol.final_x(0), 1.0);
}

TEST(SolveLexicographic, RejectsNegativeSlack) {
  EXPECT_THROW(solve_lexicographic(worked_example(), LexMode::Strict, -1e-3), Error);
}
