// SPDX-License-Identifier: Apache-2.0

#include "membrane/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace membrane {

double LoadParams::mu() const {
  if (!(d > 0.0))
    throw std::domain_error("mu = 1/D requires D > 0");
  return 1.0 / d;
}

double ShapeEval::meridional_stretch() const noexcept { return std::hypot(dz, dr); }

StretchState stretches(const ShapeEval& shape, double s) {
  if (!(s > 0.0))
    throw std::domain_error("stretches: s must be positive, use pole_stretches at s = 0");
  if (!(shape.r > 0.0))
    throw std::domain_error("stretches: radius must be positive");
  return StretchState::from_in_plane(shape.meridional_stretch(), shape.r / s);
}

StretchState pole_stretches(const ShapeEval& shape) {
  return StretchState::from_in_plane(shape.meridional_stretch(), shape.dr);
}

Curvatures curvatures(const ShapeEval& shape) {
  if (!(shape.r > 0.0))
    throw std::domain_error("curvatures: r = 0 at the pole, evaluate at interior points");
  const double l1 = shape.meridional_stretch();
  if (!(l1 > 0.0))
    throw std::domain_error("curvatures: degenerate meridian");
  return {(shape.d2r * shape.dz - shape.dr * shape.d2z) / (l1 * l1 * l1),
          -shape.dz / (shape.r * l1)};
}

Curvatures pole_curvatures(const ShapeEval& shape) {
  if (!(shape.dr > 0.0))
    throw std::domain_error("pole_curvatures: r'(0) must be positive");
  const double k = -shape.d2z / (shape.dr * shape.dr);
  return {k, k};
}

double hydro_load(double z, const LoadParams& load) noexcept { return load.c - load.d * z; }

double normal_angle(const ShapeEval& shape) {
  if (!(shape.meridional_stretch() > 0.0))
    throw std::domain_error("normal_angle: degenerate meridian");
  return std::atan2(-shape.dz, shape.dr);
}

} // namespace membrane
