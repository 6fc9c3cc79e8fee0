// SPDX-License-Identifier: Apache-2.0

#include "membrane/material.hpp"

#include <cmath>
#include <stdexcept>

namespace membrane {

namespace {

struct InvariantGradient
{
  double dI1 = 0.0;
  double dI2 = 0.0;
};

// Invariants of the incompressible state (a, b, 1/(ab)) and their partials in a.
// Partials in b follow by swapping the arguments.
InvariantGradient invariant_partials_first(double a, double b) noexcept {
  const double a3 = a * a * a;
  return {2.0 * a - 2.0 / (a3 * b * b), -2.0 / a3 + 2.0 * a * b * b};
}

} // namespace

bool MaterialParams::is_finite() const noexcept {
  return std::isfinite(gamma1) && std::isfinite(gamma2) && std::isfinite(gamma3);
}

StretchState StretchState::from_in_plane(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("stretches must be positive");
  return {lambda1, lambda2, 1.0 / (lambda1 * lambda2)};
}

double StretchState::invariant1() const noexcept {
  return lambda1 * lambda1 + lambda2 * lambda2 + lambda3 * lambda3;
}

double StretchState::invariant2() const noexcept {
  return 1.0 / (lambda1 * lambda1) + 1.0 / (lambda2 * lambda2) + 1.0 / (lambda3 * lambda3);
}

double energy(double I1, double I2, const MaterialParams& mat) noexcept {
  const double e1 = I1 - 3.0;
  const double e2 = I2 - 3.0;
  return e1 + mat.gamma1 * e2 + mat.gamma2 * e1 * e1 + mat.gamma3 * e1 * e1 * e1;
}

EnergyDerivs energy_derivs(double I1, double /*I2*/, const MaterialParams& mat) noexcept {
  const double e1 = I1 - 3.0;
  EnergyDerivs d;
  d.dW_dI1     = 1.0 + 2.0 * mat.gamma2 * e1 + 3.0 * mat.gamma3 * e1 * e1;
  d.dW_dI2     = mat.gamma1;
  d.d2W_dI1dI1 = 2.0 * mat.gamma2 + 6.0 * mat.gamma3 * e1;
  d.d2W_dI1dI2 = 0.0;
  d.d2W_dI2dI2 = 0.0;
  return d;
}

PrincipalStresses principal_stresses(const StretchState& st, const MaterialParams& mat) noexcept {
  const auto d   = energy_derivs(st.invariant1(), st.invariant2(), mat);
  const double l1 = st.lambda1, l2 = st.lambda2, l3 = st.lambda3;
  const double l3sq = l3 * l3;
  return {l3 * (l1 * l1 - l3sq) * (d.dW_dI1 + l2 * l2 * d.dW_dI2),
          l3 * (l2 * l2 - l3sq) * (d.dW_dI1 + l1 * l1 * d.dW_dI2)};
}

double stiffness_scalar(double a, double b, const MaterialParams& mat) noexcept {
  const double l3  = 1.0 / (a * b);
  const double I1  = a * a + b * b + l3 * l3;
  const double I2  = 1.0 / (a * a) + 1.0 / (b * b) + 1.0 / (l3 * l3);
  const auto d     = energy_derivs(I1, I2, mat);
  const double a2  = a * a;
  return (1.0 - 1.0 / (a2 * a2 * b * b)) * (d.dW_dI1 + b * b * d.dW_dI2);
}

StiffnessDerivs stiffness_derivs(double a, double b, const MaterialParams& mat) noexcept {
  const double l3 = 1.0 / (a * b);
  const double I1 = a * a + b * b + l3 * l3;
  const double I2 = 1.0 / (a * a) + 1.0 / (b * b) + 1.0 / (l3 * l3);
  const auto d    = energy_derivs(I1, I2, mat);

  const double a2 = a * a, b2 = b * b;
  const double factor = 1.0 - 1.0 / (a2 * a2 * b2);   // 1 - a^-4 b^-2
  const double bracket = d.dW_dI1 + b2 * d.dW_dI2;     // W_1 + b^2 W_2

  const auto ga = invariant_partials_first(a, b);
  const auto gb = invariant_partials_first(b, a);

  // d(W_1 + b^2 W_2)/dx = W_11 I1_x + W_12 I2_x + b^2 (W_12 I1_x + W_22 I2_x) [+ 2b W_2 for x = b]
  const double dbracket_da = d.d2W_dI1dI1 * ga.dI1 + d.d2W_dI1dI2 * ga.dI2
                           + b2 * (d.d2W_dI1dI2 * ga.dI1 + d.d2W_dI2dI2 * ga.dI2);
  const double dbracket_db = d.d2W_dI1dI1 * gb.dI1 + d.d2W_dI1dI2 * gb.dI2
                           + b2 * (d.d2W_dI1dI2 * gb.dI1 + d.d2W_dI2dI2 * gb.dI2)
                           + 2.0 * b * d.dW_dI2;

  const double dfactor_da = 4.0 / (a2 * a2 * a * b2);
  const double dfactor_db = 2.0 / (a2 * a2 * b2 * b);

  return {dfactor_da * bracket + factor * dbracket_da,
          dfactor_db * bracket + factor * dbracket_db};
}

} // namespace membrane
