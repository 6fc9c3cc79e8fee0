// SPDX-License-Identifier: Apache-2.0

/**
 * \file quadrature.hpp
 * \brief Open Gauss-Legendre rules on (0, 1).
 *
 * Endpoints are never sampled: lambda2 = r/s is singular at s = 0.
 */

#pragma once

#include "membrane/basis.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace membrane {

class QuadratureRule
{
public:
  QuadratureRule() = default;
  QuadratureRule(std::vector<double> nodes, std::vector<double> weights);

  [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Raised by integrate when the integrand is not finite at a node.
class NonFiniteIntegrand : public std::runtime_error
{
public:
  NonFiniteIntegrand(std::size_t index, double node);
  std::size_t index;
  double node;
};

inline constexpr int kMinGaussNodes = 2;
inline constexpr int kMaxGaussNodes = 512;

/// n-point Gauss-Legendre rule mapped to (0, 1).
[[nodiscard]] QuadratureRule gauss_rule(int n);

/// Composite Gauss rule on (0, 1) with interior panel breaks, n nodes per panel.
[[nodiscard]] QuadratureRule composite_rule(const std::vector<double>& breaks, int n_per_panel);

/// Default rule for a basis: 64 nodes for polynomial runs; 192 for the adaptive
/// family; two panels split at 1 - 6/p1 once p1 exceeds 60.
[[nodiscard]] QuadratureRule auto_rule(const BasisSpec& spec);

[[nodiscard]] double integrate(const std::function<double(double)>& f, const QuadratureRule& rule);

} // namespace membrane
