#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lexgp/primal_recovery.hpp"

using namespace lexgp;
using namespace lexgp::testing;

namespace {

DualSolution solved(const GPStage& s) { return solve_dual(build_dual(s)); }

}  // namespace

TEST(LogLinearSystem, Stage1RowsAndRhs) {
  const GPStage s = stage1();
  const DualSolution sol = solved(s);
  const LogLinearSystem sys = build_log_linear_system(s, sol);
  ASSERT_EQ(sys.matrix.rows(), 4);
  EXPECT_EQ(sys.matrix.row(3), vec({1, 0, 1}).transpose());
  EXPECT_NEAR(sys.rhs(3), std::log(2.0), 1e-8);
  EXPECT_NEAR(sys.rhs(0), std::log(0.15), 1e-8);
  EXPECT_NEAR(sys.rhs(1), std::log((2.0 / 3) / 0.1), 1e-8);
  EXPECT_EQ(sys.active_constraints, (std::vector<std::size_t>{0, 1}));
}

TEST(LogLinearSystem, Stage2DropsTheZeroWeight) {
  const GPStage s = stage2();
  const LogLinearSystem sys = build_log_linear_system(s, solved(s));
  EXPECT_EQ(sys.matrix.rows(), 4);
  EXPECT_EQ(sys.active_constraints, (std::vector<std::size_t>{0}));
  EXPECT_EQ(sys.row_terms, (std::vector<Index>{0, 1, 2, 3}));
}

TEST(LogLinearSystem, SingleMonomial) {
  const GPStage s(monomial(2.5, vec({1})), {});
  DualSolution sol;
  sol.w = vec({1.0});
  sol.value = 7.0;
  sol.lambda = VectorXd(0);
  const LogLinearSystem sys = build_log_linear_system(s, sol);
  ASSERT_EQ(sys.matrix.rows(), 1);
  EXPECT_DOUBLE_EQ(sys.rhs(0), std::log(7.0 / 2.5));
}

TEST(LogLinearSystem, AllWeightsBelowThresholdIsDegenerate) {
  const GPStage s(monomial(1.0, vec({1})), {});
  DualSolution sol;
  sol.w = vec({1e-12});
  sol.value = 1.0;
  try {
    build_log_linear_system(s, sol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDual);
  }
}

TEST(RecoverPrimal, Stage2MatchesReportedPoint) {
  const GPStage s = stage2();
  const DualSolution sol = solved(s);
  const PrimalReport r = recover_primal(build_log_linear_system(s, sol), s, sol);
  for (Index j = 0; j < 3; ++j) EXPECT_LE(relative_error(r.x(j), kStage2ReportedX(j)), 1e-4) << j;
  EXPECT_TRUE(r.unique);
  EXPECT_EQ(r.rank, 3);
  EXPECT_EQ(r.optimal_set_dimension, 0);
  EXPECT_NEAR(r.objective_value, kStage2Value, 1e-6);
  EXPECT_LE(r.duality_gap, 1e-9);
}

TEST(RecoverPrimal, Stage1MinimumNormRepresentative) {
  const GPStage s = stage1();
  const DualSolution sol = solved(s);
  const PrimalReport r = recover_primal(build_log_linear_system(s, sol), s, sol);
  EXPECT_FALSE(r.unique);
  EXPECT_EQ(r.rank, 2);
  EXPECT_EQ(r.optimal_set_dimension, 1);
  EXPECT_NEAR(r.objective_value, 0.15, 1e-6);
  // Closed form: with s = ln x3, the optimal family is z = (ln 2 - s, ln(10/3) - s, s);
  // the minimum-norm member has s = (ln 2 + ln(10/3)) / 3.
  const double t = (std::log(2.0) + std::log(10.0 / 3)) / 3.0;
  const VectorXd expected = vec({std::log(2.0) - t, std::log(10.0 / 3) - t, t}).array().exp();
  EXPECT_LE((r.x - expected).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(r.nullspace.cols(), 1);
  EXPECT_NEAR(r.nullspace.col(0).norm(), 1.0, 1e-12);
}

TEST(RecoverPrimal, NullspaceWitnessKeepsObjective) {
  const GPStage s = stage1();
  const DualSolution sol = solved(s);
  const PrimalReport r = recover_primal(build_log_linear_system(s, sol), s, sol);
  for (double step : {-0.1, 0.1, 0.35}) {
    const VectorXd x = (r.z + step * r.nullspace.col(0)).array().exp();
    EXPECT_LE(relative_error(eval(s.objective, x), r.objective_value), 1e-8);
    for (const auto& g : s.constraints) EXPECT_NEAR(eval(g, x), eval(g, r.x), 1e-12);
  }
}

TEST(RecoverPrimal, WorkedExampleStage1PointIsInTheOptimalSet) {
  const GPStage s = stage1();
  const DualSolution sol = solved(s);
  const LogLinearSystem sys = build_log_linear_system(s, sol);
  const VectorXd z = kStage1ReportedX.array().log();
  EXPECT_LE((sys.matrix * z - sys.rhs).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_NEAR(eval(s.objective, kStage1ReportedX), 0.15, 1e-6);
  for (const auto& g : s.constraints) {
    EXPECT_NEAR(eval(g, kStage1ReportedX), 1.0, 1e-5);
    EXPECT_LE(eval(g, kStage1ReportedX), 1.0 + 1e-6);
  }
  const PrimalReport r = recover_primal(sys, s, sol);
  EXPECT_GT((r.x - kStage1ReportedX).norm(), 0.1);  // a different member of the same set
}

TEST(RecoverPrimal, InconsistentWeightsAreRejected) {
  const GPStage s = stage1();
  DualSolution sol = solved(s);
  sol.value *= 1.5;  // breaks the objective row against the constraint rows
  try {
    recover_primal(build_log_linear_system(s, sol), s, sol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentSystem);
  }
}

TEST(RecoverPrimal, InfeasibleRecoveredPointIsRejected) {
  // The log system only sees the objective; the inactive constraint x1 <= 0.5 is violated at x1 = 1.
  const GPStage s(Posynomial({Term{1.0, vec({1})}, Term{1.0, vec({-1})}}), {monomial(2.0, vec({1}))});
  DualSolution sol;
  sol.w = vec({0.5, 0.5, 0.0});
  sol.value = 2.0;
  sol.lambda = vec({0.0});
  try {
    recover_primal(build_log_linear_system(s, sol), s, sol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleRecovery);
  }
}

TEST(WeightsFromPrimal, Examples) {
  EXPECT_EQ(weights_from_primal(GPStage(monomial(3.0, vec({2})), {}), vec({1.7})).objective, vec({1.0}));
  const GPStage sym(Posynomial({Term{2.0, vec({1})}, Term{8.0, vec({-1})}}), {});
  const VectorXd w = weights_from_primal(sym, vec({2.0})).objective;
  EXPECT_DOUBLE_EQ(w(0), 0.5);
  EXPECT_DOUBLE_EQ(w(1), 0.5);
  const PrimalWeights pw = weights_from_primal(stage2(), kStage2ReportedX);
  EXPECT_NEAR(pw.objective(0), 2.0 / 3, 1e-4);
  EXPECT_NEAR(pw.objective(1), 1.0 / 3, 1e-4);
}

TEST(WeightsFromPrimal, RejectsBadInput) {
  EXPECT_THROW(weights_from_primal(stage2(), vec({1, -1, 1})), Error);
  EXPECT_THROW(weights_from_primal(stage2(), vec({1, 1})), Error);
  EXPECT_THROW(weights_from_primal(stage2(), vec({1, 1, 1}), vec({1.0})), Error);
}

TEST(WeightsFromPrimal, RoundTripOnFullRankFixtures) {
  std::vector<std::pair<GPStage, DualSolution>> cases;
  for (const GPStage& s : {stage2(), open_box_stage()}) cases.emplace_back(s, solved(s));
  for (auto& r : random_solvable_stages(40, 2718))
    if (r.primal.unique) cases.emplace_back(r.stage, r.dual);
  ASSERT_GT(cases.size(), 10u);
  for (const auto& [s, sol] : cases) {
    const PrimalReport r = recover_primal(build_log_linear_system(s, sol), s, sol);
    const VectorXd back = weights_from_primal(s, r.x, sol.lambda).flat();
    EXPECT_LE((back - sol.w).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(r.consistency_residual, 1e-6);
  }
}
