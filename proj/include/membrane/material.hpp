// SPDX-License-Identifier: Apache-2.0

/**
 * \file material.hpp
 * \brief Dimensionless four-term Bidermann potential for incompressible membranes.
 *
 * The strain-energy density is scaled by the first constant C1, so that
 *
 *   W = (I1 - 3) + g1 (I2 - 3) + g2 (I1 - 3)^2 + g3 (I1 - 3)^3,
 *
 * with g1 = C2/C1, g2 = C3/C1, g3 = C4/C1. Stresses are scaled by 2 C1 h0.
 */

#pragma once

namespace membrane {

/// Ratios of the Bidermann constants to C1.
struct MaterialParams
{
  double gamma1 = 0.0; ///< C2 / C1, multiplies (I2 - 3)
  double gamma2 = 0.0; ///< C3 / C1, multiplies (I1 - 3)^2
  double gamma3 = 0.0; ///< C4 / C1, multiplies (I1 - 3)^3

  [[nodiscard]] bool is_finite() const noexcept;
};

/// Principal stretches of an incompressible sheet; lambda3 = 1/(lambda1 lambda2).
struct StretchState
{
  double lambda1 = 1.0; ///< meridional
  double lambda2 = 1.0; ///< circumferential
  double lambda3 = 1.0; ///< thickness

  /// Builds the state from the two in-plane stretches. Throws on non-positive input.
  static StretchState from_in_plane(double lambda1, double lambda2);

  [[nodiscard]] double invariant1() const noexcept;
  [[nodiscard]] double invariant2() const noexcept;
};

struct EnergyDerivs
{
  double dW_dI1     = 0.0;
  double dW_dI2     = 0.0;
  double d2W_dI1dI1 = 0.0;
  double d2W_dI1dI2 = 0.0;
  double d2W_dI2dI2 = 0.0;
};

struct PrincipalStresses
{
  double t1 = 0.0; ///< meridional
  double t2 = 0.0; ///< circumferential
};

/// Partial derivatives of U(a, b) with respect to its first and second argument.
struct StiffnessDerivs
{
  double d_first  = 0.0;
  double d_second = 0.0;
};

[[nodiscard]] double energy(double I1, double I2, const MaterialParams& mat) noexcept;

[[nodiscard]] EnergyDerivs energy_derivs(double I1, double I2, const MaterialParams& mat) noexcept;

/// T_i = lambda3 (lambda_i^2 - lambda3^2) (W_1 + lambda_{3-i}^2 W_2).
[[nodiscard]] PrincipalStresses principal_stresses(const StretchState& st, const MaterialParams& mat) noexcept;

/**
 * \brief Stiffness scalar U(a, b) = (1 - a^-4 b^-2) (W_1 + b^2 W_2) evaluated at
 *        the state with lambda1 = a, lambda2 = b.
 *
 * The argument order matters: assembly uses both U(l1, l2) and U(l2, l1).
 * The meridional stress is recovered as T1 = (l1 / l2) U(l1, l2), and
 * dW/dl1 = 2 l1 U(l1, l2) where W is viewed as a function of the two stretches.
 */
[[nodiscard]] double stiffness_scalar(double a, double b, const MaterialParams& mat) noexcept;

/// Analytic partials of stiffness_scalar(a, b) with respect to a and b.
[[nodiscard]] StiffnessDerivs stiffness_derivs(double a, double b, const MaterialParams& mat) noexcept;

} // namespace membrane
