// SPDX-License-Identifier: Apache-2.0

/**
 * \file assembly.hpp
 * \brief Ritz functional, residual g(x), Jacobian H(x) and shape-parameter gradient.
 *
 * With Q = C - D z the potential
 *
 *   I(x) = 1/2 * int_0^1 [ W(I1, I2) s + Q r^2 z' ] ds
 *
 * has gradient
 *
 *   g_i     = int [ U(l1,l2) z' u_i' - Q l2 r' u_i ] s ds,
 *   g_{m+i} = int [ U(l1,l2) r' v_i' + ( U(l2,l1) l2/s + Q l2 z' ) v_i ] s ds,
 *
 * for every D (the load term is integrated by parts using u_i(1) = r(0) = 0).
 * H = dg/dx is assembled analytically; the axial/radial cross block is built
 * once and mirrored.
 */

#pragma once

#include "membrane/basis.hpp"
#include "membrane/material.hpp"
#include "membrane/quadrature.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace membrane {

/// Basis functions evaluated once at every quadrature node.
class BasisTable
{
public:
  BasisTable(BasisSpec spec, QuadratureRule rule, bool with_p_derivs = false);

  [[nodiscard]] const BasisSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const QuadratureRule& rule() const noexcept { return rule_; }
  [[nodiscard]] const std::vector<BasisPoint>& points() const noexcept { return points_; }
  [[nodiscard]] bool has_p_derivs() const noexcept { return with_p_derivs_; }

private:
  BasisSpec spec_;
  QuadratureRule rule_;
  bool with_p_derivs_;
  std::vector<BasisPoint> points_;
};

/// Raised when an integrand or matrix entry is not finite, or the trial shape is
/// inadmissible (r <= 0 or a degenerate meridian) at a node.
class AssemblyError : public std::runtime_error
{
public:
  AssemblyError(const std::string& what, std::size_t node, double s, std::string block);
  std::size_t node;
  double s;
  std::string block;
};

[[nodiscard]] double functional_value(const Eigen::VectorXd& x, const LoadParams& load,
                                      const MaterialParams& mat, const BasisTable& table);
[[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& x, const LoadParams& load,
                                       const MaterialParams& mat, const BasisTable& table);
[[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const LoadParams& load,
                                       const MaterialParams& mat, const BasisTable& table);
/// dI/dp_i at fixed x. The table must carry p-derivatives.
[[nodiscard]] Eigen::VectorXd p_gradient(const Eigen::VectorXd& x, const LoadParams& load,
                                         const MaterialParams& mat, const BasisTable& table);
/// dg/dC at fixed x, the extra column of the sag-parametrised system.
[[nodiscard]] Eigen::VectorXd load_gradient(const Eigen::VectorXd& x, const LoadParams& load,
                                            const MaterialParams& mat, const BasisTable& table);

[[nodiscard]] double functional_value(const SolutionState& state, const MaterialParams& mat,
                                      const QuadratureRule& rule);
[[nodiscard]] Eigen::VectorXd residual(const SolutionState& state, const MaterialParams& mat,
                                       const QuadratureRule& rule);
[[nodiscard]] Eigen::MatrixXd jacobian(const SolutionState& state, const MaterialParams& mat,
                                       const QuadratureRule& rule);
[[nodiscard]] Eigen::VectorXd p_gradient(const SolutionState& state, const MaterialParams& mat,
                                         const QuadratureRule& rule);

/// Validation mode: H by central differences of the residual, column by column.
[[nodiscard]] Eigen::MatrixXd jacobian_fd(const Eigen::VectorXd& x, const LoadParams& load,
                                          const MaterialParams& mat, const BasisTable& table,
                                          double rel_step = 1e-6);

/// ||H - H^T||_inf / ||H||_inf (zero for a zero matrix).
[[nodiscard]] double symmetry_defect(const Eigen::MatrixXd& h);

} // namespace membrane
