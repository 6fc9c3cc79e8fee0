// SPDX-License-Identifier: Apache-2.0

/**
 * \file basis.hpp
 * \brief Coordinate functions for the Ritz expansions
 *
 *   z(s) = sum_k x_k u_k(s),   r(s) = s + sum_k x_{k+m} v_k(s),
 *
 * with u_k'(0) = u_k(1) = v_k(0) = v_k(1) = 0.
 *
 * Polynomial family: u_k = (s^2 - 1) s^(2k-2), v_k = s u_k.
 *
 * Adaptive family, with phi(s) = I0(y(s)) and y(s) = sum_{i=1..n} p_i s^(2i-1):
 *   u_1 = 1 - phi(s)/phi(1),  u_2 = (s^2 - 1) phi(s)/phi(1),  u_k = s^2 u_{k-1},  v_k = s u_k.
 * The ratio phi(s)/phi(1) is evaluated as exp(y(s) - y(1)) * I0s(y(s)) / I0s(y(1)) with
 * exponentially scaled I0s, so shape parameters of order 10^3 do not overflow.
 */

#pragma once

#include "membrane/kinematics.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace membrane {

enum class BasisFamily { polynomial, adaptive };

/// Smallest admissible p_1 for the adaptive family. Below it u_1 and u_2 become
/// numerically collinear (their Gram matrix is singular to working precision).
inline constexpr double kMinShapeParameter = 1e-2;

/// Largest supported number of coordinate functions per component.
inline constexpr int kMaxBasisSize = 20;

struct BasisSpec
{
  BasisFamily family = BasisFamily::polynomial;
  int m = 1;
  std::vector<double> p; ///< shape parameters p_1..p_n, adaptive family only

  static BasisSpec polynomial(int m);
  static BasisSpec adaptive(int m, std::vector<double> p);

  /// Throws std::invalid_argument when the spec is unusable.
  void validate() const;
  [[nodiscard]] bool is_adaptive() const noexcept { return family == BasisFamily::adaptive; }
  [[nodiscard]] int size() const noexcept { return 2 * m; }
};

/// Coefficients of the expansion together with the basis and load they refer to.
struct SolutionState
{
  Eigen::VectorXd x; ///< length 2m: z-coefficients first, then r-coefficients
  BasisSpec spec;
  LoadParams load;

  static SolutionState undeformed(BasisSpec spec, LoadParams load);
};

/// Value and first two s-derivatives of a scalar function.
struct Jet
{
  double f  = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// phi = I0(y(s)) with s-derivatives and derivatives with respect to each p_i.
struct PhiEval
{
  double value = 1.0;
  double d1    = 0.0;
  double d2    = 0.0;
  std::vector<double> dp;  ///< d phi / d p_i
  std::vector<double> d1p; ///< d phi' / d p_i
};

/// Unscaled phi; overflows for y(s) beyond ~700, which the basis itself never needs.
[[nodiscard]] PhiEval phi(double s, std::span<const double> p);

[[nodiscard]] Jet eval_u(int k, double s, const BasisSpec& spec);
[[nodiscard]] Jet eval_v(int k, double s, const BasisSpec& spec);

/// All coordinate functions at one point. p-derivative tables are indexed [i][k]
/// and filled only on request for the adaptive family.
struct BasisPoint
{
  std::vector<Jet> u;
  std::vector<Jet> v;
  std::vector<std::vector<double>> u_dp, u1_dp, v_dp, v1_dp;
};

[[nodiscard]] BasisPoint eval_basis(double s, const BasisSpec& spec, bool with_p_derivs = false);

[[nodiscard]] ShapeEval eval_shape(const SolutionState& state, double s);

/// Derivatives of the shape with respect to one shape parameter, x held fixed.
struct ShapeParamDeriv
{
  double dz  = 0.0; ///< dz/dp_i
  double dr  = 0.0; ///< dr/dp_i
  double ddz = 0.0; ///< dz'/dp_i
  double ddr = 0.0; ///< dr'/dp_i
};

/// One entry per shape parameter. Throws for the polynomial family.
[[nodiscard]] std::vector<ShapeParamDeriv> shape_p_derivs(const SolutionState& state, double s);

/// Shape from an already evaluated basis point.
[[nodiscard]] ShapeEval combine(const BasisPoint& bp, const Eigen::VectorXd& x, double s) noexcept;

} // namespace membrane
