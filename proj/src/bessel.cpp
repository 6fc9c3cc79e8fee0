// SPDX-License-Identifier: Apache-2.0

#include "membrane/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace membrane {

namespace {

constexpr double kSeriesLimit = 30.0;

// Unscaled power series for 0 <= x <= kSeriesLimit. All terms are positive.
ScaledBessel series(double x) noexcept {
  const double q = 0.25 * x * x;
  double t0 = 1.0, s0 = 1.0; // I0 terms (q^k / (k!)^2)
  double t1 = 1.0, s1 = 1.0; // I1/(x/2) terms (q^k / (k! (k+1)!))
  for (int k = 1; k < 200; ++k) {
    t0 *= q / (double(k) * k);
    t1 *= q / (double(k) * (k + 1));
    s0 += t0;
    s1 += t1;
    if (t0 < 1e-17 * s0 && t1 < 1e-17 * s1)
      break;
  }
  return {s0, 0.5 * x * s1, 0.5 * s1};
}

// exp(-x) I_nu(x) for x > kSeriesLimit:
// (2 pi x)^(-1/2) sum_k (-1)^k a_k(nu) / x^k, a_k = prod_{j<=k} (4nu^2 - (2j-1)^2) / (k! 8^k).
double asymptotic_scaled(int nu, double x) noexcept {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 120; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term))
      break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum))
      break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

} // namespace

ScaledBessel bessel_i0_i1_scaled(double x) noexcept {
  const double ax = std::abs(x);
  ScaledBessel out;
  if (ax <= kSeriesLimit) {
    out = series(ax);
    const double e = std::exp(-ax);
    out.i0 *= e;
    out.i1 *= e;
    out.i1_over_x *= e;
  } else {
    out.i0        = asymptotic_scaled(0, ax);
    out.i1        = asymptotic_scaled(1, ax);
    out.i1_over_x = out.i1 / ax;
  }
  if (x < 0.0)
    out.i1 = -out.i1; // I1 is odd, I1(x)/x is even
  return out;
}

BesselPair bessel_i0_i1(double x) noexcept {
  const double ax = std::abs(x);
  if (ax <= kSeriesLimit) {
    const auto s = series(ax);
    return {s.i0, x < 0.0 ? -s.i1 : s.i1};
  }
  const auto s = bessel_i0_i1_scaled(x);
  const double e = std::exp(ax);
  return {s.i0 * e, s.i1 * e};
}

} // namespace membrane
