// SPDX-License-Identifier: Apache-2.0

#include "membrane/basis.hpp"
#include "membrane/bessel.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace membrane;

namespace {

Eigen::VectorXd random_x(int m, double scale) {
  Eigen::VectorXd x(2 * m);
  for (int i = 0; i < 2 * m; ++i)
    x[i] = oracle::uniform(-scale, scale);
  return x;
}

// Column-normalised Gram matrix of {u_k} on a uniform 64-point interior grid.
double gram_condition(const BasisSpec& spec) {
  const int n = 64;
  Eigen::MatrixXd a(n, spec.m);
  for (int i = 0; i < n; ++i) {
    const auto bp = eval_basis((i + 0.5) / n, spec);
    for (int k = 0; k < spec.m; ++k)
      a(i, k) = bp.u[k].f;
  }
  for (int k = 0; k < spec.m; ++k)
    a.col(k) /= a.col(k).norm();
  const Eigen::MatrixXd g = a.transpose() * a;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  return svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
}

} // namespace

TEST(BasisSpec, Validation) {
  EXPECT_THROW((void)BasisSpec::polynomial(0), std::invalid_argument);
  EXPECT_THROW((void)BasisSpec::polynomial(kMaxBasisSize + 1), std::invalid_argument);
  EXPECT_THROW((void)BasisSpec::adaptive(3, {}), std::invalid_argument);
  EXPECT_THROW((void)BasisSpec::adaptive(3, {0.5 * kMinShapeParameter}), std::invalid_argument);
  EXPECT_THROW((void)BasisSpec::adaptive(3, {NAN}), std::invalid_argument);
  EXPECT_NO_THROW((void)BasisSpec::adaptive(3, {kMinShapeParameter}));
  EXPECT_EQ(BasisSpec::polynomial(4).size(), 8);
}

TEST(Phi, ValuesAtThePole) {
  const std::vector<double> p{3.0};
  const auto f = phi(0.0, p);
  EXPECT_EQ(f.value, 1.0);
  EXPECT_EQ(f.d1, 0.0);
}

TEST(Phi, AgainstSeriesOracle) {
  const std::vector<double> p{2.0};
  EXPECT_LT(oracle::rel_err(phi(0.5, p).value, oracle::bessel_series(0, 1.0)), 1e-14);
  EXPECT_LT(oracle::rel_err(phi(0.5, p).value, 1.2660658777520084), 1e-14);
}

TEST(Phi, DerivativesAgainstFiniteDifferences) {
  const double s = 0.7;
  const std::vector<double> p{3.0, 0.4};
  const auto f = phi(s, p);
  const auto at = [&](double t) { return phi(t, p); };
  EXPECT_LT(oracle::rel_err(f.d1, oracle::central([&](double t) { return at(t).value; }, s, 1e-6)), 1e-8);
  EXPECT_LT(oracle::rel_err(f.d2, oracle::central([&](double t) { return at(t).d1; }, s, 1e-6)), 1e-7);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto with = [&](double v) {
      auto q = p;
      q[i] = v;
      return phi(s, q);
    };
    EXPECT_LT(oracle::rel_err(f.dp[i], oracle::central([&](double v) { return with(v).value; }, p[i], 1e-6)), 1e-6);
    EXPECT_LT(oracle::rel_err(f.d1p[i], oracle::central([&](double v) { return with(v).d1; }, p[i], 1e-6)), 1e-6);
  }
}

TEST(EvalU, PolynomialByHand) {
  const auto spec = BasisSpec::polynomial(3);
  EXPECT_DOUBLE_EQ(eval_u(1, 0.5, spec).f, -0.75);
  EXPECT_EQ(eval_u(1, 0.0, spec).d1, 0.0);
  const auto u3 = eval_u(3, 0.5, spec); // s^6 - s^4
  EXPECT_DOUBLE_EQ(u3.f, std::pow(0.5, 6) - std::pow(0.5, 4));
  EXPECT_DOUBLE_EQ(u3.d1, 6 * std::pow(0.5, 5) - 4 * std::pow(0.5, 3));
  EXPECT_DOUBLE_EQ(u3.d2, 30 * std::pow(0.5, 4) - 12 * std::pow(0.5, 2));
  EXPECT_DOUBLE_EQ(eval_v(2, 0.5, spec).f, 0.5 * eval_u(2, 0.5, spec).f);
}

TEST(EvalU, IndexOutOfRange) {
  const auto spec = BasisSpec::adaptive(2, {3.0});
  EXPECT_THROW((void)eval_u(0, 0.5, spec), std::out_of_range);
  EXPECT_THROW((void)eval_u(3, 0.5, spec), std::out_of_range);
  EXPECT_THROW((void)eval_v(3, 0.5, spec), std::out_of_range);
}

TEST(EvalU, AdaptiveClosedForms) {
  const double p1 = 4.0, s = 0.6;
  const auto spec = BasisSpec::adaptive(4, {p1});
  const double ratio = oracle::bessel_series(0, p1 * s) / oracle::bessel_series(0, p1);
  EXPECT_NEAR(eval_u(1, s, spec).f, 1.0 - ratio, 1e-14);
  EXPECT_NEAR(eval_u(2, s, spec).f, ratio * (s * s - 1.0), 1e-14);
  EXPECT_NEAR(eval_u(4, s, spec).f, std::pow(s, 4) * ratio * (s * s - 1.0), 1e-14);
  EXPECT_NEAR(eval_v(3, s, spec).f, s * eval_u(3, s, spec).f, 1e-15);
}

TEST(EvalU, AdaptiveEdgeAndPoleForAnyP) {
  for (double p1 : {0.5, 2.0, 10.0}) {
    const auto spec = BasisSpec::adaptive(2, {p1});
    EXPECT_NEAR(eval_u(1, 1.0, spec).f, 0.0, 1e-15);
    EXPECT_NEAR(eval_u(2, 1.0, spec).f, 0.0, 1e-15);
    EXPECT_EQ(eval_v(1, 0.0, spec).f, 0.0);
    EXPECT_EQ(eval_u(1, 0.0, spec).d1, 0.0);
    // One-sided difference from the even extension: u1(h) - u1(0) = O(h^2).
    const double h = 1e-5;
    EXPECT_LT(std::abs(eval_u(1, h, spec).f - eval_u(1, 0.0, spec).f) / h, 1e-3);
  }
}

TEST(EvalU, AdaptiveDerivativesAgainstFiniteDifferences) {
  const auto spec = BasisSpec::adaptive(5, {7.0, -0.8});
  for (int k = 1; k <= 5; ++k)
    for (double s : {0.2, 0.55, 0.93}) {
      const auto j = eval_u(k, s, spec);
      const double d1 = oracle::central([&](double t) { return eval_u(k, t, spec).f; }, s, 1e-6);
      const double d2 = oracle::central([&](double t) { return eval_u(k, t, spec).d1; }, s, 1e-6);
      EXPECT_NEAR(j.d1, d1, 1e-8 * std::max(1.0, std::abs(d1)));
      EXPECT_NEAR(j.d2, d2, 1e-7 * std::max(1.0, std::abs(d2)));
      const auto v = eval_v(k, s, spec);
      EXPECT_NEAR(v.d1, oracle::central([&](double t) { return eval_v(k, t, spec).f; }, s, 1e-6), 1e-8);
    }
}

TEST(EvalU, SmallArgumentBranchIsContinuous) {
  // 1 - phi(s)/phi(1) switches evaluation route at y(1) = 2.
  for (double s : {0.0, 0.3, 0.8}) {
    const double lo = eval_u(1, s, BasisSpec::adaptive(1, {2.0 - 1e-12})).f;
    const double hi = eval_u(1, s, BasisSpec::adaptive(1, {2.0 + 1e-12})).f;
    EXPECT_NEAR(lo, hi, 1e-12);
  }
}

TEST(EvalU, LargeShapeParameterDoesNotOverflow) {
  const auto spec = BasisSpec::adaptive(3, {2000.0});
  for (double s : {0.0, 0.5, 0.999, 1.0}) {
    const auto bp = eval_basis(s, spec, true);
    for (int k = 0; k < 3; ++k) {
      EXPECT_TRUE(std::isfinite(bp.u[k].f) && std::isfinite(bp.u[k].d1) && std::isfinite(bp.u[k].d2));
      EXPECT_TRUE(std::isfinite(bp.u_dp[0][k]) && std::isfinite(bp.u1_dp[0][k]));
    }
  }
  EXPECT_NEAR(eval_u(1, 0.5, spec).f, 1.0, 1e-12);
}

TEST(BasisProperty, BoundaryConditionsForBothFamilies) {
  for (int m = 1; m <= 12; ++m) {
    std::vector<BasisSpec> specs{BasisSpec::polynomial(m)};
    for (double p1 : {0.1, 1.0, 3.0, 17.0, 60.0, 100.0})
      specs.push_back(BasisSpec::adaptive(m, {p1}));
    for (const auto& spec : specs) {
      const auto at0 = eval_basis(0.0, spec);
      const auto at1 = eval_basis(1.0, spec);
      for (int k = 0; k < m; ++k) {
        EXPECT_LE(std::abs(at0.u[k].d1), 1e-12);
        EXPECT_LE(std::abs(at1.u[k].f), 1e-12);
        EXPECT_LE(std::abs(at0.v[k].f), 1e-12);
        EXPECT_LE(std::abs(at1.v[k].f), 1e-12);
      }
    }
  }
}

TEST(BasisProperty, PolynomialParity) {
  // z-functions are even in s and r-functions odd, coefficient by coefficient.
  const auto spec = BasisSpec::polynomial(6);
  for (int k = 1; k <= 6; ++k)
    for (double s : {0.15, 0.6, 0.95}) {
      EXPECT_DOUBLE_EQ(eval_u(k, -s, spec).f, eval_u(k, s, spec).f);
      EXPECT_DOUBLE_EQ(eval_v(k, -s, spec).f, -eval_v(k, s, spec).f);
    }
}

TEST(BasisProperty, SmallShapeParameterDegeneratesGracefully) {
  for (double s : {0.0, 0.4, 0.9}) {
    const double u1 = eval_u(1, s, BasisSpec::adaptive(2, {kMinShapeParameter})).f;
    // 1 - I0(p s)/I0(p) = p^2 (1 - s^2) / 4 + O(p^4)
    EXPECT_NEAR(u1, 0.25 * kMinShapeParameter * kMinShapeParameter * (1.0 - s * s), 1e-9);
  }
  EXPECT_LT(gram_condition(BasisSpec::adaptive(2, {kMinShapeParameter})), 1e12);
}

TEST(EvalShape, UndeformedAndBoundaryValues) {
  const auto st = SolutionState::undeformed(BasisSpec::polynomial(4), {});
  const auto sh = eval_shape(st, 0.3);
  EXPECT_EQ(sh.z, 0.0);
  EXPECT_EQ(sh.r, 0.3);
  EXPECT_EQ(sh.dz, 0.0);
  EXPECT_EQ(sh.dr, 1.0);
  EXPECT_EQ(sh.d2z, 0.0);
  EXPECT_EQ(sh.d2r, 0.0);
  for (int i = 0; i < 50; ++i) {
    for (const auto& spec : {BasisSpec::polynomial(6), BasisSpec::adaptive(6, {oracle::uniform(0.1, 50.0)})}) {
      const SolutionState rs{random_x(6, 2.0), spec, {}};
      const auto edge = eval_shape(rs, 1.0);
      const auto pole = eval_shape(rs, 0.0);
      EXPECT_LE(std::abs(edge.z), 1e-12);
      EXPECT_LE(std::abs(edge.r - 1.0), 1e-12);
      EXPECT_LE(std::abs(pole.dz), 1e-12);
      EXPECT_LE(std::abs(pole.r), 1e-12);
    }
  }
  EXPECT_THROW((void)eval_shape({Eigen::VectorXd::Zero(3), BasisSpec::polynomial(2), {}}, 0.5),
               std::invalid_argument);
}

TEST(ShapePDerivs, Cases) {
  const auto spec = BasisSpec::adaptive(4, {6.0});
  const auto zero = shape_p_derivs(SolutionState::undeformed(spec, {}), 0.4);
  EXPECT_EQ(zero[0].dz, 0.0);
  EXPECT_EQ(zero[0].dr, 0.0);
  EXPECT_EQ(zero[0].ddz, 0.0);
  EXPECT_EQ(zero[0].ddr, 0.0);
  const SolutionState any{random_x(4, 1.0), spec, {}};
  const auto edge = shape_p_derivs(any, 1.0);
  EXPECT_NEAR(edge[0].dz, 0.0, 1e-13);
  EXPECT_NEAR(edge[0].dr, 0.0, 1e-13);
  EXPECT_THROW((void)shape_p_derivs(SolutionState::undeformed(BasisSpec::polynomial(2), {}), 0.5), std::logic_error);
}

TEST(ShapePDerivs, AgainstFiniteDifferencesInP) {
  for (int trial = 0; trial < 5; ++trial) {
    const double s = oracle::uniform(0.05, 0.98), p1 = oracle::uniform(1.0, 30.0);
    const Eigen::VectorXd x = random_x(5, 1.0);
    const auto shape_at = [&](double p) { return eval_shape({x, BasisSpec::adaptive(5, {p}), {}}, s); };
    const auto d = shape_p_derivs({x, BasisSpec::adaptive(5, {p1}), {}}, s)[0];
    const double h = 1e-3 * p1;
    const double fz = oracle::central4([&](double p) { return shape_at(p).z; }, p1, h);
    const double fr = oracle::central4([&](double p) { return shape_at(p).r; }, p1, h);
    const double fdz = oracle::central4([&](double p) { return shape_at(p).dz; }, p1, h);
    const double fdr = oracle::central4([&](double p) { return shape_at(p).dr; }, p1, h);
    EXPECT_LT(oracle::rel_err(d.dz, fz, 1e-6), 1e-6);
    EXPECT_LT(oracle::rel_err(d.dr, fr, 1e-6), 1e-6);
    EXPECT_LT(oracle::rel_err(d.ddz, fdz, 1e-6), 1e-6);
    EXPECT_LT(oracle::rel_err(d.ddr, fdr, 1e-6), 1e-6);
  }
}
