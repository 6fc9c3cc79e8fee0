// SPDX-License-Identifier: Apache-2.0

#include "membrane/assembly.hpp"

#include <cmath>

namespace membrane {

namespace {

// Everything the integrands need at one node.
struct NodeState
{
  double s, w;
  ShapeEval shape;
  double l1, l2, q;
  double u12, u21;       // U(l1,l2), U(l2,l1)
  StiffnessDerivs du12;  // partials of U(l1,l2)
  StiffnessDerivs du21;  // partials of U(l2,l1) in its own argument order
};

NodeState node_state(std::size_t i, const Eigen::VectorXd& x, const LoadParams& load,
                     const MaterialParams& mat, const BasisTable& table, bool with_derivs) {
  NodeState n;
  n.s = table.rule().nodes()[i];
  n.w = table.rule().weights()[i];
  n.shape = combine(table.points()[i], x, n.s);
  n.l1 = n.shape.meridional_stretch();
  n.l2 = n.shape.r / n.s;
  if (!(n.l1 > 0.0) || !(n.l2 > 0.0) || !std::isfinite(n.l1) || !std::isfinite(n.l2))
    throw AssemblyError("inadmissible trial shape", i, n.s, "kinematics");
  n.q   = hydro_load(n.shape.z, load);
  n.u12 = stiffness_scalar(n.l1, n.l2, mat);
  n.u21 = stiffness_scalar(n.l2, n.l1, mat);
  if (with_derivs) {
    n.du12 = stiffness_derivs(n.l1, n.l2, mat);
    n.du21 = stiffness_derivs(n.l2, n.l1, mat);
  }
  return n;
}

void check_vector(const Eigen::VectorXd& v, const BasisTable& table, const char* block) {
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (!std::isfinite(v[k]))
      throw AssemblyError("non-finite entry " + std::to_string(k), 0, table.rule().nodes().front(), block);
}

void check_size(const Eigen::VectorXd& x, const BasisTable& table) {
  if (x.size() != table.spec().size())
    throw std::invalid_argument("coefficient vector length does not match 2m");
}

} // namespace

BasisTable::BasisTable(BasisSpec spec, QuadratureRule rule, bool with_p_derivs)
    : spec_(std::move(spec)), rule_(std::move(rule)), with_p_derivs_(with_p_derivs && spec_.is_adaptive()) {
  spec_.validate();
  points_.reserve(rule_.size());
  for (double s : rule_.nodes())
    points_.push_back(eval_basis(s, spec_, with_p_derivs_));
}

AssemblyError::AssemblyError(const std::string& what, std::size_t n, double at, std::string blk)
    : std::runtime_error(what + " at node " + std::to_string(n) + " (s = " + std::to_string(at) + ", " + blk + ")"),
      node(n), s(at), block(std::move(blk)) {}

double functional_value(const Eigen::VectorXd& x, const LoadParams& load, const MaterialParams& mat,
                        const BasisTable& table) {
  check_size(x, table);
  double sum = 0.0;
  for (std::size_t i = 0; i < table.rule().size(); ++i) {
    const double s = table.rule().nodes()[i];
    const auto sh  = combine(table.points()[i], x, s);
    const double l1 = sh.meridional_stretch(), l2 = sh.r / s;
    if (!(l1 > 0.0) || !(l2 > 0.0))
      throw AssemblyError("inadmissible trial shape", i, s, "functional");
    const auto st = StretchState::from_in_plane(l1, l2);
    const double integrand = energy(st.invariant1(), st.invariant2(), mat) * s
                           + hydro_load(sh.z, load) * sh.r * sh.r * sh.dz;
    if (!std::isfinite(integrand))
      throw AssemblyError("non-finite functional integrand", i, s, "functional");
    sum += table.rule().weights()[i] * integrand;
  }
  return 0.5 * sum;
}

Eigen::VectorXd residual(const Eigen::VectorXd& x, const LoadParams& load, const MaterialParams& mat,
                         const BasisTable& table) {
  check_size(x, table);
  const int m = table.spec().m;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * m);
  for (std::size_t i = 0; i < table.rule().size(); ++i) {
    const auto n = node_state(i, x, load, mat, table, false);
    const auto& bp = table.points()[i];
    const double ws = n.w * n.s;
    const double au = n.u12 * n.shape.dz, bu = n.q * n.l2 * n.shape.dr;
    const double av = n.u12 * n.shape.dr, bv = n.u21 * n.l2 / n.s + n.q * n.l2 * n.shape.dz;
    if (!std::isfinite(au + bu))
      throw AssemblyError("non-finite residual integrand", i, n.s, "axial");
    if (!std::isfinite(av + bv))
      throw AssemblyError("non-finite residual integrand", i, n.s, "radial");
    for (int k = 0; k < m; ++k) {
      g[k]     += ws * (au * bp.u[k].d1 - bu * bp.u[k].f);
      g[k + m] += ws * (av * bp.v[k].d1 + bv * bp.v[k].f);
    }
  }
  return g;
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const LoadParams& load, const MaterialParams& mat,
                         const BasisTable& table) {
  check_size(x, table);
  const int m = table.spec().m;
  const double D = load.d;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (std::size_t i = 0; i < table.rule().size(); ++i) {
    const auto n = node_state(i, x, load, mat, table, true);
    const auto& bp = table.points()[i];
    const double ws = n.w * n.s;
    const double dz = n.shape.dz, dr = n.shape.dr, s = n.s;

    const double a_l1 = n.du12.d_first / n.l1;      // dU/dl1 / l1
    const double ub   = n.du12.d_second;             // dU/dl2
    // axial-axial
    const double c_uu1 = a_l1 * dz * dz + n.u12;
    const double c_uu0 = D * n.l2 * dr;
    // radial-radial
    const double c_vv1 = a_l1 * dr * dr + n.u12;
    const double c_vv_mixed = dr * ub / s;
    const double c_vv0 = (n.du21.d_first * n.l2 + n.u21 + n.q * s * dz) / (s * s);
    // cross: row i (axial), column m + j (radial)
    const double c_x11 = a_l1 * dz * dr;
    const double c_x10 = ub * dz / s + n.q * n.l2;
    const double c_x00 = -D * n.l2 * dz;

    if (!std::isfinite(c_uu1 + c_uu0 + c_vv1 + c_vv_mixed + c_vv0 + c_x11 + c_x10 + c_x00))
      throw AssemblyError("non-finite Jacobian integrand", i, s, "jacobian");

    for (int a = 0; a < m; ++a) {
      const auto& ua = bp.u[a];
      const auto& va = bp.v[a];
      for (int b = 0; b <= a; ++b) {
        const auto& ub_ = bp.u[b];
        const auto& vb = bp.v[b];
        h(a, b) += ws * (c_uu1 * ua.d1 * ub_.d1 + c_uu0 * ua.f * ub_.f);
        h(a + m, b + m) += ws * (c_vv1 * va.d1 * vb.d1 + c_vv_mixed * (va.d1 * vb.f + va.f * vb.d1)
                                 + c_vv0 * va.f * vb.f);
      }
      for (int b = 0; b < m; ++b) {
        const auto& vb = bp.v[b];
        h(a, b + m) += ws * (c_x11 * ua.d1 * vb.d1 + c_x10 * ua.d1 * vb.f + c_x00 * ua.f * vb.f);
      }
    }
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < a; ++b) {
      h(b, a) = h(a, b);
      h(b + m, a + m) = h(a + m, b + m);
    }
  h.bottomLeftCorner(m, m) = h.topRightCorner(m, m).transpose();
  return h;
}

Eigen::VectorXd p_gradient(const Eigen::VectorXd& x, const LoadParams& load, const MaterialParams& mat,
                           const BasisTable& table) {
  check_size(x, table);
  if (!table.spec().is_adaptive())
    throw std::logic_error("p_gradient requires the adaptive family");
  if (!table.has_p_derivs())
    throw std::logic_error("p_gradient requires a basis table with shape-parameter derivatives");
  const int m = table.spec().m;
  const std::size_t np = table.spec().p.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(Eigen::Index(np));
  for (std::size_t i = 0; i < table.rule().size(); ++i) {
    const auto n = node_state(i, x, load, mat, table, false);
    const auto& bp = table.points()[i];
    const double ws = n.w * n.s;
    const double c_dz1 = n.u12 * n.shape.dz;
    const double c_dz0 = -n.q * n.l2 * n.shape.dr;
    const double c_dr1 = n.u12 * n.shape.dr;
    const double c_dr0 = n.u21 * n.l2 / n.s + n.q * n.l2 * n.shape.dz;
    for (std::size_t j = 0; j < np; ++j) {
      double dz = 0.0, ddz = 0.0, dr = 0.0, ddr = 0.0;
      for (int k = 0; k < m; ++k) {
        dz  += x[k] * bp.u_dp[j][k];
        ddz += x[k] * bp.u1_dp[j][k];
        dr  += x[k + m] * bp.v_dp[j][k];
        ddr += x[k + m] * bp.v1_dp[j][k];
      }
      grad[Eigen::Index(j)] += ws * (c_dz1 * ddz + c_dz0 * dz + c_dr1 * ddr + c_dr0 * dr);
    }
  }
  check_vector(grad, table, "shape-parameter");
  return grad;
}

Eigen::VectorXd load_gradient(const Eigen::VectorXd& x, const LoadParams& load, const MaterialParams& mat,
                              const BasisTable& table) {
  check_size(x, table);
  const int m = table.spec().m;
  Eigen::VectorXd gc = Eigen::VectorXd::Zero(2 * m);
  for (std::size_t i = 0; i < table.rule().size(); ++i) {
    const auto n = node_state(i, x, load, mat, table, false);
    const auto& bp = table.points()[i];
    const double ws = n.w * n.s;
    for (int k = 0; k < m; ++k) {
      gc[k]     -= ws * n.l2 * n.shape.dr * bp.u[k].f;
      gc[k + m] += ws * n.l2 * n.shape.dz * bp.v[k].f;
    }
  }
  return gc;
}

double functional_value(const SolutionState& state, const MaterialParams& mat, const QuadratureRule& rule) {
  return functional_value(state.x, state.load, mat, BasisTable(state.spec, rule));
}

Eigen::VectorXd residual(const SolutionState& state, const MaterialParams& mat, const QuadratureRule& rule) {
  return residual(state.x, state.load, mat, BasisTable(state.spec, rule));
}

Eigen::MatrixXd jacobian(const SolutionState& state, const MaterialParams& mat, const QuadratureRule& rule) {
  return jacobian(state.x, state.load, mat, BasisTable(state.spec, rule));
}

Eigen::VectorXd p_gradient(const SolutionState& state, const MaterialParams& mat, const QuadratureRule& rule) {
  return p_gradient(state.x, state.load, mat, BasisTable(state.spec, rule, true));
}

Eigen::MatrixXd jacobian_fd(const Eigen::VectorXd& x, const LoadParams& load, const MaterialParams& mat,
                            const BasisTable& table, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = rel_step * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    h.col(j) = (residual(xp, load, mat, table) - residual(xm, load, mat, table)) / (2.0 * step);
  }
  return h;
}

double symmetry_defect(const Eigen::MatrixXd& h) {
  const double norm = h.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm == 0.0)
    return 0.0;
  const Eigen::MatrixXd diff = h - h.transpose();
  return diff.cwiseAbs().rowwise().sum().maxCoeff() / norm;
}

} // namespace membrane
