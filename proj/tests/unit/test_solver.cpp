// SPDX-License-Identifier: Apache-2.0

#include "membrane/solver.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace membrane;

namespace {

const MaterialParams kRubber{0.02, -0.015, 0.00025};
const MaterialParams kMooney{0.1, 0.0, 0.0};

Problem rubber_problem(int m) { return {kRubber, {1.7, 0.0}, BasisSpec::polynomial(m), {}}; }
Problem hydro_problem(int m) { return {kMooney, {0.5, 10.0}, BasisSpec::adaptive(m, {std::sqrt(10.0)}), {}}; }

struct Row
{
  double z, r, mdz, dr, md2z, md2r;
};

void expect_row(const ShapeEval& e, const Row& want, double tol1, double tol2) {
  EXPECT_NEAR(e.z, want.z, tol1);
  EXPECT_NEAR(e.r, want.r, tol1);
  EXPECT_NEAR(-e.dz, want.mdz, tol1);
  EXPECT_NEAR(e.dr, want.dr, tol1);
  EXPECT_NEAR(-e.d2z, want.md2z, tol2);
  EXPECT_NEAR(-e.d2r, want.md2r, tol2);
}

} // namespace

TEST(Newton, FirstAndSixthReferenceRowsOfTheRubberCap) {
  const Row rows[] = {{0.7016, 0.2865, 0.2923, 1.3966, 1.4617, 0.5408},
                      {0.7926, 0.3069, 0.4362, 1.4757, 2.0406, 0.8596}};
  for (const int m : {1, 6}) {
    const auto pb = rubber_problem(m);
    const auto sol = newton_solve(pb, initial_guess(pb));
    ASSERT_TRUE(sol.report.converged) << sol.report.message;
    const SolutionState st{sol.x, pb.basis, pb.load};
    expect_row(eval_shape(st, 0.2), rows[m == 1 ? 0 : 1], 5e-4, 5e-3);
    EXPECT_LE(residual(st, kRubber, pb.effective_rule()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Newton, ZeroLoadConvergesImmediately) {
  auto pb = rubber_problem(4);
  pb.load = {0.0, 0.0};
  const auto x0 = initial_guess(pb);
  EXPECT_EQ(x0.cwiseAbs().maxCoeff(), 0.0);
  const auto sol = newton_solve(pb, x0);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_EQ(sol.report.iterations, 1);
  EXPECT_EQ(sol.report.residual_history.size(), 1u);
}

TEST(Newton, InitialGuessFollowsTheSignOfC) {
  for (const double c : {1.7, -1.7, 0.3}) {
    auto pb = rubber_problem(3);
    pb.load.c = c;
    const SolutionState st{initial_guess(pb), pb.basis, pb.load};
    EXPECT_GT(eval_shape(st, 0.0).z * c, 0.0) << c;
  }
}

TEST(Newton, FewIterationsFromTheEmbeddedStart) {
  const auto pb = rubber_problem(6);
  const auto sol = newton_solve(pb, initial_guess(pb));
  ASSERT_TRUE(sol.report.converged);
  EXPECT_LE(sol.report.iterations, 8);
  EXPECT_EQ(static_cast<std::size_t>(sol.report.iterations), sol.report.residual_history.size());
}

TEST(Newton, TailIsSuperlinear) {
  const auto pb = rubber_problem(5);
  const auto sol = newton_solve(pb, initial_guess(pb), {1e-14, 25, false, 1e-14});
  const auto& h = sol.report.residual_history;
  ASSERT_GE(h.size(), 3u);
  // Observed order log h[k] / log h[k-1] once the residual is small.
  int checked = 0;
  for (std::size_t k = 1; k < h.size(); ++k)
    if (h[k - 1] < 1e-2 && h[k] > 1e-13) {
      EXPECT_GE(std::log(h[k]) / std::log(h[k - 1]), 1.5) << k;
      ++checked;
    }
  EXPECT_GE(checked, 1);
  // Contraction over the last three residuals, ending with a sharp drop.
  const std::size_t n = h.size();
  EXPECT_LE(h[n - 2], 0.5 * h[n - 3]);
  EXPECT_LE(h[n - 1], 0.5 * h[n - 2]);
  EXPECT_LT(h[n - 1] / h[n - 2], 1e-2);
}

TEST(Newton, NonFiniteStartIsReported) {
  const auto pb = rubber_problem(2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x[0] = NAN;
  const auto sol = newton_solve(pb, x);
  EXPECT_FALSE(sol.report.converged);
  EXPECT_EQ(sol.report.status, SolveStatus::non_finite);
}

TEST(Embed, KeepsBlocksAligned) {
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 4;
  const auto y = embed(x, 2, 3);
  Eigen::VectorXd want(6);
  want << 1, 2, 0, 3, 4, 0;
  EXPECT_EQ(y, want);
  EXPECT_THROW((void)embed(x, 2, 1), std::invalid_argument);
}

TEST(SagSolve, AgreesWithLoadSolve) {
  const auto pb = rubber_problem(5);
  const auto ref = newton_solve(pb, initial_guess(pb));
  ASSERT_TRUE(ref.report.converged);
  const double f = pole_functional(pb.basis).dot(ref.x);
  const auto sag = solve_at_sag(pb, f, embed(initial_guess(pb.with_load({1.5, 0.0})), 5, 5), 1.5);
  ASSERT_TRUE(sag.report.converged) << sag.report.message;
  EXPECT_NEAR(sag.c, 1.7, 1e-8);
  EXPECT_LT((sag.x - ref.x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SagSolve, ZeroSagMeansZeroLoad) {
  const auto pb = rubber_problem(3);
  const auto sag = solve_at_sag(pb, 0.0, Eigen::VectorXd::Constant(6, 0.01), 0.2);
  ASSERT_TRUE(sag.report.converged);
  EXPECT_NEAR(sag.c, 0.0, 1e-12);
  // The flat unstressed disc has no transverse stiffness: g is cubic in the axial
  // coefficients, so ||g|| <= 1e-10 only pins them to about (1e-10)^(1/3).
  EXPECT_LT(sag.x.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(PoleFunctional, MatchesShapeAtThePole) {
  for (const auto& spec : {BasisSpec::polynomial(4), BasisSpec::adaptive(4, {7.0})}) {
    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i)
      x[i] = oracle::uniform(-0.2, 0.2);
    EXPECT_NEAR(pole_functional(spec).dot(x), eval_shape({x, spec, {}}, 0.0).z, 1e-15);
  }
}

TEST(Delta, RequiresNonZeroLoad) {
  const auto st = SolutionState::undeformed(BasisSpec::polynomial(2), {0.0, 0.0});
  EXPECT_THROW((void)delta_at(st, kRubber, 0.5), std::domain_error);
  EXPECT_THROW((void)delta_at({Eigen::VectorXd::Zero(4), BasisSpec::polynomial(2), {1.0, 0.0}}, kRubber, 1.5),
               std::domain_error);
}

TEST(Delta, ShrinksWithTheBasisSize) {
  double prev_max = 1.0;
  for (const int m : {1, 3, 6}) {
    const auto pb = rubber_problem(m);
    const auto sol = newton_solve(pb, initial_guess(pb));
    const auto d = delta_diagnostic({sol.x, pb.basis, pb.load}, kRubber, {0.2});
    EXPECT_LT(d.max_on_grid, prev_max) << m;
    EXPECT_LE(d.at_probes[0], d.max_on_grid * (1 + 1e-12) + 1e-3); // the grid does not contain 0.2 itself
    prev_max = d.max_on_grid;
  }
  EXPECT_LT(prev_max, 1e-3);
}

TEST(Delta, AttachFillsTheReport) {
  const auto pb = rubber_problem(6);
  auto sol = newton_solve(pb, initial_guess(pb));
  attach_delta(sol.report, {sol.x, pb.basis, pb.load}, kRubber, {0.2, 0.5});
  ASSERT_EQ(sol.report.probe_deltas.size(), 2u);
  EXPECT_EQ(sol.report.delta_at, sol.report.probe_deltas[0]);
  // Same order of magnitude as the reference 2e-5.
  EXPECT_GT(sol.report.delta_at, 2e-6);
  EXPECT_LT(sol.report.delta_at, 2e-4);
}

TEST(InitP1, FallbackAndErrors) {
  EXPECT_DOUBLE_EQ(init_p1(nullptr, {0.5, 10.0}, kMooney), std::sqrt(10.0));
  EXPECT_THROW((void)init_p1(nullptr, {0.5, 0.0}, kMooney), std::invalid_argument);
}

TEST(Optimize, SixTermReferenceRowWithOptimalShapeParameter) {
  const auto pb = hydro_problem(6);
  const auto res = solve_optimal_basis(pb);
  ASSERT_TRUE(res.report.converged) << res.report.message;
  ASSERT_TRUE(res.report.final_p.has_value());
  const SolutionState st{res.x, BasisSpec::adaptive(pb.basis.m, res.p), pb.load};
  const auto e = eval_shape(st, 0.9);
  EXPECT_NEAR(10.0 * e.z, 0.36448, 5e-4);
  EXPECT_NEAR(-e.dz, 0.17841, 5e-4);
  EXPECT_NEAR(e.r, 0.90693, 5e-4);
  EXPECT_NEAR(e.dr, 0.99275, 5e-4);
  EXPECT_NEAR(-e.d2z, 2.3461, 5e-3);
  EXPECT_NEAR(-e.d2r, 0.41404, 5e-3);

  // Stationarity in p relative to the functional.
  const auto rule = pb.effective_rule();
  const auto gp = p_gradient(st, kMooney, rule);
  EXPECT_LE(std::abs(gp[0]), 1e-6 * std::abs(res.functional));

  // Warm starts: no inner solve after the first needs more corrections than it.
  ASSERT_FALSE(res.report.inner_iterations.empty());
  for (std::size_t k = 1; k < res.report.inner_iterations.size(); ++k)
    EXPECT_LE(res.report.inner_iterations[k], res.report.inner_iterations.front());
}

TEST(Optimize, OneTermReferenceRow) {
  const auto pb = hydro_problem(1);
  const auto res = solve_optimal_basis(pb);
  ASSERT_TRUE(res.report.converged);
  const auto e = eval_shape({res.x, BasisSpec::adaptive(pb.basis.m, res.p), pb.load}, 0.9);
  EXPECT_NEAR(10.0 * e.z, 0.32896, 5e-4);
  EXPECT_NEAR(e.r, 0.90532, 5e-4);
  EXPECT_NEAR(e.dr, 0.97550, 5e-4);
}

TEST(Optimize, FunctionalIsUnimodalAroundTheOptimum) {
  const auto pb = hydro_problem(3);
  const auto res = solve_optimal_basis(pb);
  ASSERT_TRUE(res.report.converged);
  const double p_opt = res.p[0];
  // Scan I(p) on a geometric grid, stepping outward from the optimum with warm starts.
  std::vector<double> ps(13), values(13);
  const auto scan = [&](int from, int to, int dir) {
    Eigen::VectorXd x = res.x;
    for (int k = from; k != to; k += dir) {
      const std::size_t i = static_cast<std::size_t>(k + 6);
      ps[i] = p_opt * std::pow(1.15, k);
      const auto q = pb.with_basis(BasisSpec::adaptive(pb.basis.m, {ps[i]}));
      const auto sol = newton_solve(q, x, {1e-12, 40, true, 1e-14});
      ASSERT_TRUE(sol.report.converged) << ps[i];
      x = sol.x;
      values[i] = functional_value(SolutionState{x, q.basis, q.load}, kMooney, q.effective_rule());
    }
  };
  scan(0, -7, -1);
  scan(1, 7, 1);
  for (std::size_t k = 1; k <= 6; ++k)
    EXPECT_LT(values[k], values[k - 1]) << ps[k];
  for (std::size_t k = 7; k < values.size(); ++k)
    EXPECT_GT(values[k], values[k - 1]) << ps[k];
  EXPECT_LE(res.functional, values[6] + 1e-12 * std::abs(values[6]));
}

TEST(Optimize, EdgeStressEstimateIsCloseToTheOptimum) {
  const auto pb = hydro_problem(1);
  const auto start = newton_solve(pb, initial_guess(pb));
  ASSERT_TRUE(start.report.converged);
  const SolutionState st{start.x, pb.basis, pb.load};
  const double guess = init_p1(&st, pb.load, kMooney);
  const auto res = solve_optimal_basis(pb);
  EXPECT_GT(guess, res.p[0] / 3.0);
  EXPECT_LT(guess, res.p[0] * 3.0);
}

TEST(Optimize, RejectsPolynomialBasis) {
  EXPECT_THROW((void)optimize_basis(rubber_problem(2), {1.0}, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(SolveDirect, DampedRetryRescuesTheEightTermPolynomial) {
  const Problem pb{kMooney, {0.5, 10.0}, BasisSpec::polynomial(8), {}};
  const auto plain = newton_solve(pb, initial_guess(pb));
  const auto res = solve_direct(pb);
  ASSERT_TRUE(res.report.converged) << res.report.message;
  EXPECT_EQ(static_cast<std::size_t>(res.report.iterations), res.report.residual_history.size());
  if (!plain.report.converged) {
    EXPECT_NE(res.report.message.find("retried with damping"), std::string::npos);
    EXPECT_GT(res.report.iterations, plain.report.iterations);
  }
  // The boundary layer is out of reach of the polynomial basis.
  const double d = delta_at({res.x, pb.basis, pb.load}, kMooney, 0.9);
  EXPECT_GT(d, 1e-3);
}

TEST(SolveDirect, IllConditionedPowerBasisIsReportedAsSingular) {
  const auto res = solve_direct(rubber_problem(12));
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.status, SolveStatus::singular_jacobian);
  EXPECT_GT(res.report.condition_estimate, 1e14);
}
