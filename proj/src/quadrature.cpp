// SPDX-License-Identifier: Apache-2.0

#include "membrane/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace membrane {

QuadratureRule::QuadratureRule(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.size() != weights_.size())
    throw std::invalid_argument("quadrature nodes and weights differ in length");
  for (double s : nodes_)
    if (!(s > 0.0 && s < 1.0))
      throw std::invalid_argument("quadrature nodes must lie in the open interval (0, 1)");
}

NonFiniteIntegrand::NonFiniteIntegrand(std::size_t i, double s)
    : std::runtime_error("non-finite integrand at node " + std::to_string(i) + " (s = " + std::to_string(s) + ")"),
      index(i), node(s) {}

QuadratureRule gauss_rule(int n) {
  if (n < kMinGaussNodes || n > kMaxGaussNodes)
    throw std::invalid_argument("Gauss rule size must be in [" + std::to_string(kMinGaussNodes) + ", " +
                                std::to_string(kMaxGaussNodes) + "]");
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton on P_n from the Tricomi-type initial guess; roots of P_n on (-1, 1).
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16)
        break;
    }
    const double wt = 2.0 / ((1.0 - t * t) * dp * dp);
    // t > 0 here; map the pair (+t, -t) to (1+t)/2 and (1-t)/2 on (0, 1)
    x[n - 1 - i] = 0.5 * (1.0 + t);
    x[i]         = 0.5 * (1.0 - t);
    w[n - 1 - i] = 0.5 * wt;
    w[i]         = 0.5 * wt;
  }
  if (n % 2 == 1)
    x[n / 2] = 0.5;
  return {std::move(x), std::move(w)};
}

QuadratureRule composite_rule(const std::vector<double>& breaks, int n_per_panel) {
  std::vector<double> edges{0.0};
  for (double b : breaks) {
    if (!(b > edges.back() && b < 1.0))
      throw std::invalid_argument("panel breaks must increase strictly inside (0, 1)");
    edges.push_back(b);
  }
  edges.push_back(1.0);
  const auto base = gauss_rule(n_per_panel);
  std::vector<double> x, w;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], h = edges[p + 1] - edges[p];
    for (std::size_t i = 0; i < base.size(); ++i) {
      x.push_back(a + h * base.nodes()[i]);
      w.push_back(h * base.weights()[i]);
    }
  }
  return {std::move(x), std::move(w)};
}

QuadratureRule auto_rule(const BasisSpec& spec) {
  if (!spec.is_adaptive())
    return gauss_rule(64);
  const double p1 = spec.p.empty() ? 0.0 : spec.p.front();
  if (p1 > 60.0)
    return composite_rule({1.0 - 6.0 / p1}, 96);
  return gauss_rule(192);
}

double integrate(const std::function<double(double)>& f, const QuadratureRule& rule) {
  double sum = 0.0;
  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = f(x[i]);
    if (!std::isfinite(v))
      throw NonFiniteIntegrand(i, x[i]);
    sum += w[i] * v;
  }
  return sum;
}

} // namespace membrane
