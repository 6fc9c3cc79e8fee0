// SPDX-License-Identifier: Apache-2.0

/**
 * \file kinematics.hpp
 * \brief Stretches, curvatures and hydrostatic load of an axisymmetric trial shape.
 *
 * Coordinates are scaled by the undeformed radius. The shape is the generatrix
 * (z(s), r(s)) over the undeformed radial coordinate s in [0, 1]; z is oriented
 * so that a positive pressure constant produces a positive pole sag.
 */

#pragma once

#include "membrane/material.hpp"

namespace membrane {

/// Hydrostatic load Q = C - D z, with z measured from the undeformed centre.
struct LoadParams
{
  double c = 0.0; ///< constant pressure component
  double d = 0.0; ///< liquid-weight slope, >= 0

  /// Singular-perturbation parameter 1/D. Throws when d <= 0.
  [[nodiscard]] double mu() const;
};

/// Trial shape and its first two s-derivatives at one point.
struct ShapeEval
{
  double z   = 0.0;
  double r   = 0.0;
  double dz  = 0.0;
  double dr  = 0.0;
  double d2z = 0.0;
  double d2r = 0.0;

  [[nodiscard]] double meridional_stretch() const noexcept;
};

struct Curvatures
{
  double k1 = 0.0; ///< meridional
  double k2 = 0.0; ///< circumferential
};

/// lambda1 = |(z', r')|, lambda2 = r/s. Throws for s <= 0 or r <= 0.
[[nodiscard]] StretchState stretches(const ShapeEval& shape, double s);

/// Stretches at the pole, using the limit lambda2 -> r'(0).
[[nodiscard]] StretchState pole_stretches(const ShapeEval& shape);

/// Principal curvatures. Throws when r <= 0 (use pole_curvatures at s = 0).
[[nodiscard]] Curvatures curvatures(const ShapeEval& shape);

/// Limit at the pole, where z'(0) = 0 and both curvatures equal -z''/r'^2.
[[nodiscard]] Curvatures pole_curvatures(const ShapeEval& shape);

[[nodiscard]] double hydro_load(double z, const LoadParams& load) noexcept;

/// Angle between the outer normal and the symmetry axis, cos(alpha) = r'/lambda1.
[[nodiscard]] double normal_angle(const ShapeEval& shape);

} // namespace membrane
