// SPDX-License-Identifier: Apache-2.0

/**
 * \file bessel.hpp
 * \brief Modified Bessel functions I0 and I1 of real argument.
 *
 * Power series below |x| = 30, large-argument asymptotic expansion above. The
 * scaled variants return exp(-|x|) I_n(x) and never overflow.
 */

#pragma once

namespace membrane {

struct BesselPair
{
  double i0 = 1.0;
  double i1 = 0.0;
};

/// exp(-|x|) times I0(x), I1(x) and I1(x)/x (the last one tends to 1/2 at 0).
struct ScaledBessel
{
  double i0        = 1.0;
  double i1        = 0.0;
  double i1_over_x = 0.5;
};

/// I0(x), I1(x). Overflows to +inf beyond |x| ~ 713; use the scaled form there.
[[nodiscard]] BesselPair bessel_i0_i1(double x) noexcept;

[[nodiscard]] ScaledBessel bessel_i0_i1_scaled(double x) noexcept;

} // namespace membrane
