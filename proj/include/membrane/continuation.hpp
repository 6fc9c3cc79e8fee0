// SPDX-License-Identifier: Apache-2.0

/**
 * \file continuation.hpp
 * \brief Load sweeps in C that switch to the sag parametrisation near folds.
 */

#pragma once

#include "membrane/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace membrane {

enum class Parametrization { load, sag };

struct ContinuationPoint
{
  double c_value = 0.0;
  double sag = 0.0;     ///< f = z(0)
  Eigen::VectorXd x;
  int stability_hint = 0; ///< sign of dC/df towards the neighbouring points
  Parametrization via = Parametrization::load;
  int iterations = 0;
};

struct StepPolicy
{
  double initial_step = 0.05;
  double min_step = 1e-4;
  double max_step = 0.2;
  double sag_step = 0.05;
  double min_sag_step = 1e-4;
  double max_sag_step = 0.1;
  int easy_steps_to_grow = 3;
  int slow_iterations = 8;      ///< more Newton iterations than this triggers the sag switch
  double max_condition = 1e10;  ///< so does a Jacobian condition estimate above this
  double max_arclength = 0.5;   ///< bound on the (C, f) distance between consecutive points
  int max_points = 4000;
};

struct ContinuationResult
{
  std::vector<ContinuationPoint> points;
  bool complete = false;
  std::string message;
};

/**
 * \brief Traces the equilibrium curve from c_start to c_end.
 *
 * Steps in C use a secant predictor through the last two points. When Newton fails,
 * is slow or the Jacobian is nearly singular, stepping continues in the pole sag f
 * in the direction of travel; it returns to C once a fold has been passed and C moves
 * towards c_end again. The curve ends at the first point with C beyond c_end; that
 * point is replaced by the solution at c_end itself.
 */
[[nodiscard]] ContinuationResult continue_in_load(const Problem& problem, double c_start, double c_end,
                                                  const StepPolicy& policy = {},
                                                  std::optional<Eigen::VectorXd> x_start = {},
                                                  const NewtonOptions& newton = {});

/// Sign changes of dC/df along consecutive points.
[[nodiscard]] int count_folds(const std::vector<ContinuationPoint>& points);

} // namespace membrane
