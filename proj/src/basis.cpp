// SPDX-License-Identifier: Apache-2.0

#include "membrane/basis.hpp"
#include "membrane/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace membrane {

namespace {

// c * s^e with the convention that a zero coefficient kills negative powers.
double mono(double c, double s, int e) noexcept {
  if (c == 0.0)
    return 0.0;
  return c * std::pow(s, e);
}

struct Argument
{
  double y  = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
};

// y(s) = sum_{i=1..n} p_i s^(2i-1) and its two s-derivatives.
Argument argument(double s, std::span<const double> p) noexcept {
  Argument a;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int e = 2 * int(i) + 1;
    a.y  += mono(p[i], s, e);
    a.y1 += mono(p[i] * e, s, e - 1);
    a.y2 += mono(p[i] * e * (e - 1), s, e - 2);
  }
  return a;
}

// R(s) = phi(s)/phi(1), 1 - R(s), and their derivatives.
struct Ratio
{
  double R = 1.0, R1 = 0.0, R2 = 0.0;
  double one_minus_R = 0.0;
  std::vector<double> dR, dR1;
};

// 1 - I0(y)/I0(y1) for small y1 from the series difference, free of cancellation.
double one_minus_ratio_small(double y, double y1) noexcept {
  const double a = 0.25 * y1 * y1, b = 0.25 * y * y;
  double ta = 1.0, tb = 1.0, diff = 0.0, i0 = 1.0;
  for (int k = 1; k < 60; ++k) {
    ta *= a / (double(k) * k);
    tb *= b / (double(k) * k);
    diff += ta - tb;
    i0 += ta;
    if (ta < 1e-18 * i0)
      break;
  }
  return diff / i0;
}

Ratio ratio(double s, std::span<const double> p, bool with_p_derivs) {
  const auto arg  = argument(s, p);
  const auto edge = argument(1.0, p);
  const auto b    = bessel_i0_i1_scaled(arg.y);
  const auto b1   = bessel_i0_i1_scaled(edge.y);

  // exp(|y| - |y1|) / I0s(y1) turns scaled values at y into ratios to I0(y1).
  const double scale = std::exp(std::abs(arg.y) - std::abs(edge.y)) / b1.i0;

  Ratio out;
  out.R  = b.i0 * scale;
  out.R1 = b.i1 * arg.y1 * scale;
  out.R2 = ((b.i0 - b.i1_over_x) * arg.y1 * arg.y1 + b.i1 * arg.y2) * scale;
  out.one_minus_R = std::abs(edge.y) <= 2.0 ? one_minus_ratio_small(arg.y, edge.y) : 1.0 - out.R;

  if (with_p_derivs) {
    const double edge_log_deriv = b1.i1 / b1.i0; // I1(y1)/I0(y1), dy(1)/dp_i = 1
    out.dR.resize(p.size());
    out.dR1.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int e = 2 * int(i) + 1;
      const double dy  = std::pow(s, e);
      const double dy1 = e * std::pow(s, e - 1);
      out.dR[i]  = b.i1 * dy * scale - out.R * edge_log_deriv;
      out.dR1[i] = ((b.i0 - b.i1_over_x) * dy * arg.y1 + b.i1 * dy1) * scale - out.R1 * edge_log_deriv;
    }
  }
  return out;
}

void check_index(int k, const BasisSpec& spec) {
  if (k < 1 || k > spec.m)
    throw std::out_of_range("basis index " + std::to_string(k) + " outside 1.." + std::to_string(spec.m));
}

Jet polynomial_u(int k, double s) noexcept {
  // (s^2 - 1) s^(2k-2) = s^(2k) - s^(2k-2)
  const int a = 2 * k, b = 2 * k - 2;
  return {mono(1.0, s, a) - mono(1.0, s, b),
          mono(a, s, a - 1) - mono(b, s, b - 1),
          mono(double(a) * (a - 1), s, a - 2) - mono(double(b) * (b - 1), s, b - 2)};
}

// s^2 * g
Jet times_s2(const Jet& g, double s) noexcept {
  return {s * s * g.f, 2.0 * s * g.f + s * s * g.d1, 2.0 * g.f + 4.0 * s * g.d1 + s * s * g.d2};
}

// s * g
Jet times_s(const Jet& g, double s) noexcept {
  return {s * g.f, g.f + s * g.d1, 2.0 * g.d1 + s * g.d2};
}

} // namespace

BasisSpec BasisSpec::polynomial(int m) {
  BasisSpec spec{BasisFamily::polynomial, m, {}};
  spec.validate();
  return spec;
}

BasisSpec BasisSpec::adaptive(int m, std::vector<double> p) {
  BasisSpec spec{BasisFamily::adaptive, m, std::move(p)};
  spec.validate();
  return spec;
}

void BasisSpec::validate() const {
  if (m < 1 || m > kMaxBasisSize)
    throw std::invalid_argument("basis size m must be in 1.." + std::to_string(kMaxBasisSize));
  if (family == BasisFamily::adaptive) {
    if (p.empty())
      throw std::invalid_argument("adaptive basis needs at least one shape parameter");
    for (double v : p)
      if (!std::isfinite(v))
        throw std::invalid_argument("shape parameters must be finite");
    if (!(p.front() >= kMinShapeParameter))
      throw std::invalid_argument("adaptive basis needs p1 >= " + std::to_string(kMinShapeParameter) +
                                  "; use the polynomial family instead");
  }
}

SolutionState SolutionState::undeformed(BasisSpec spec, LoadParams load) {
  spec.validate();
  SolutionState st{Eigen::VectorXd::Zero(spec.size()), std::move(spec), load};
  return st;
}

PhiEval phi(double s, std::span<const double> p) {
  const auto arg = argument(s, p);
  const auto b   = bessel_i0_i1_scaled(arg.y);
  const double e = std::exp(std::abs(arg.y));
  PhiEval out;
  out.value = b.i0 * e;
  out.d1    = b.i1 * arg.y1 * e;
  out.d2    = ((b.i0 - b.i1_over_x) * arg.y1 * arg.y1 + b.i1 * arg.y2) * e;
  out.dp.resize(p.size());
  out.d1p.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int k = 2 * int(i) + 1;
    const double dy = std::pow(s, k), dy1 = k * std::pow(s, k - 1);
    out.dp[i]  = b.i1 * dy * e;
    out.d1p[i] = ((b.i0 - b.i1_over_x) * dy * arg.y1 + b.i1 * dy1) * e;
  }
  return out;
}

BasisPoint eval_basis(double s, const BasisSpec& spec, bool with_p_derivs) {
  const int m = spec.m;
  BasisPoint bp;
  bp.u.resize(m);
  bp.v.resize(m);

  if (spec.family == BasisFamily::polynomial) {
    for (int k = 1; k <= m; ++k)
      bp.u[k - 1] = polynomial_u(k, s);
  } else {
    const auto R = ratio(s, spec.p, with_p_derivs);
    bp.u[0] = {R.one_minus_R, -R.R1, -R.R2};
    if (m >= 2) {
      const double q = s * s - 1.0;
      bp.u[1] = {R.R * q, R.R1 * q + 2.0 * s * R.R, R.R2 * q + 4.0 * s * R.R1 + 2.0 * R.R};
    }
    for (int k = 3; k <= m; ++k)
      bp.u[k - 1] = times_s2(bp.u[k - 2], s);

    if (with_p_derivs) {
      const std::size_t n = spec.p.size();
      bp.u_dp.assign(n, std::vector<double>(m));
      bp.u1_dp.assign(n, std::vector<double>(m));
      bp.v_dp.assign(n, std::vector<double>(m));
      bp.v1_dp.assign(n, std::vector<double>(m));
      for (std::size_t i = 0; i < n; ++i) {
        auto& du = bp.u_dp[i];
        auto& du1 = bp.u1_dp[i];
        du[0]  = -R.dR[i];
        du1[0] = -R.dR1[i];
        if (m >= 2) {
          du[1]  = R.dR[i] * (s * s - 1.0);
          du1[1] = R.dR1[i] * (s * s - 1.0) + 2.0 * s * R.dR[i];
        }
        for (int k = 2; k < m; ++k) {
          du[k]  = s * s * du[k - 1];
          du1[k] = 2.0 * s * du[k - 1] + s * s * du1[k - 1];
        }
        for (int k = 0; k < m; ++k) {
          bp.v_dp[i][k]  = s * du[k];
          bp.v1_dp[i][k] = du[k] + s * du1[k];
        }
      }
    }
  }
  for (int k = 0; k < m; ++k)
    bp.v[k] = times_s(bp.u[k], s);
  return bp;
}

Jet eval_u(int k, double s, const BasisSpec& spec) {
  check_index(k, spec);
  if (spec.family == BasisFamily::polynomial)
    return polynomial_u(k, s);
  return eval_basis(s, spec).u[k - 1];
}

Jet eval_v(int k, double s, const BasisSpec& spec) {
  check_index(k, spec);
  if (spec.family == BasisFamily::polynomial)
    return times_s(polynomial_u(k, s), s);
  return eval_basis(s, spec).v[k - 1];
}

ShapeEval combine(const BasisPoint& bp, const Eigen::VectorXd& x, double s) noexcept {
  const int m = int(bp.u.size());
  ShapeEval sh{0.0, s, 0.0, 1.0, 0.0, 0.0};
  for (int k = 0; k < m; ++k) {
    const double a = x[k], b = x[k + m];
    sh.z   += a * bp.u[k].f;
    sh.dz  += a * bp.u[k].d1;
    sh.d2z += a * bp.u[k].d2;
    sh.r   += b * bp.v[k].f;
    sh.dr  += b * bp.v[k].d1;
    sh.d2r += b * bp.v[k].d2;
  }
  return sh;
}

ShapeEval eval_shape(const SolutionState& state, double s) {
  if (state.x.size() != state.spec.size())
    throw std::invalid_argument("coefficient vector length does not match 2m");
  return combine(eval_basis(s, state.spec), state.x, s);
}

std::vector<ShapeParamDeriv> shape_p_derivs(const SolutionState& state, double s) {
  if (!state.spec.is_adaptive())
    throw std::logic_error("shape parameter derivatives exist only for the adaptive family");
  if (state.x.size() != state.spec.size())
    throw std::invalid_argument("coefficient vector length does not match 2m");
  const auto bp = eval_basis(s, state.spec, true);
  const int m = state.spec.m;
  std::vector<ShapeParamDeriv> out(state.spec.p.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int k = 0; k < m; ++k) {
      const double a = state.x[k], b = state.x[k + m];
      out[i].dz  += a * bp.u_dp[i][k];
      out[i].ddz += a * bp.u1_dp[i][k];
      out[i].dr  += b * bp.v_dp[i][k];
      out[i].ddr += b * bp.v1_dp[i][k];
    }
  }
  return out;
}

} // namespace membrane
