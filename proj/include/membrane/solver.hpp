// SPDX-License-Identifier: Apache-2.0

/**
 * \file solver.hpp
 * \brief Newton iteration on g(x) = 0, sag-parametrised solves, and the outer
 *        secant search for the adaptive shape parameters.
 */

#pragma once

#include "membrane/assembly.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace membrane {

/// Everything that defines one discrete problem except the coefficients.
struct Problem
{
  MaterialParams material;
  LoadParams load;
  BasisSpec basis;
  std::optional<QuadratureRule> rule; ///< auto_rule(basis) when empty

  [[nodiscard]] QuadratureRule effective_rule() const { return rule ? *rule : auto_rule(basis); }
  [[nodiscard]] Problem with_basis(BasisSpec b) const;
  [[nodiscard]] Problem with_load(LoadParams l) const;
};

struct NewtonOptions
{
  double tol = 1e-10;  ///< on ||g||_inf
  int max_iter = 25;   ///< Newton corrections
  bool damped = false; ///< backtrack on ||g|| when a full step does not reduce it
  double singular_rcond = 1e-14;
};

enum class SolveStatus { converged, max_iterations, singular_jacobian, non_finite, diverged };

[[nodiscard]] std::string_view to_string(SolveStatus status) noexcept;

struct SolveReport
{
  SolveStatus status = SolveStatus::diverged;
  bool converged = false;
  /// Residual evaluations, equal to residual_history.size(); an exact initial root counts as 1.
  int iterations = 0;
  std::vector<double> residual_history; ///< ||g||_inf at each iterate
  double condition_estimate = 0.0;      ///< 1/rcond of the last factorised matrix
  std::vector<double> probes;
  std::vector<double> probe_deltas;
  double delta_at = -1.0;  ///< delta at the first probe, -1 when not computed
  double delta_max = -1.0; ///< max over the diagnostic grid, -1 when not computed
  std::optional<std::vector<double>> final_p;
  int outer_iterations = 0;
  std::vector<int> inner_iterations; ///< Newton counts of each outer step
  std::string message;
};

/// Raised when a solve cannot produce a usable state; carries the partial report.
class SolveFailure : public std::runtime_error
{
public:
  SolveFailure(const std::string& what, SolveReport report);
  SolveReport report;
};

struct NewtonResult
{
  Eigen::VectorXd x;
  SolveReport report;
};

[[nodiscard]] NewtonResult newton_solve(const Problem& problem, const BasisTable& table, Eigen::VectorXd x0,
                                        const NewtonOptions& opts = {});
[[nodiscard]] NewtonResult newton_solve(const Problem& problem, Eigen::VectorXd x0, const NewtonOptions& opts = {});

/// Places the coefficients of a smaller expansion into the leading slots of each block.
[[nodiscard]] Eigen::VectorXd embed(const Eigen::VectorXd& x, int m_from, int m_to);

/**
 * \brief Start vector for size m: solve the two-unknown (m = 1) system from a start
 *        whose pole sag has the sign of C, then embed it.
 *
 * Throws SolveFailure when the small system cannot be solved.
 */
[[nodiscard]] Eigen::VectorXd initial_guess(const Problem& problem);

/**
 * \brief Newton from initial_guess(problem); when full steps fail for a reason other than a
 *        singular Jacobian, the same start is retried with damping. The report covers both
 *        attempts.
 */
[[nodiscard]] NewtonResult solve_direct(const Problem& problem, const NewtonOptions& opts = {});

/// Pole sag z(0) as a linear functional of x.
[[nodiscard]] Eigen::VectorXd pole_functional(const BasisSpec& spec);

struct SagResult
{
  Eigen::VectorXd x;
  double c = 0.0;
  SolveReport report;
};

/// Solves {g(x; C) = 0, z(0) = f_target} for (x, C) by Newton on the bordered system.
[[nodiscard]] SagResult solve_at_sag(const Problem& problem, const BasisTable& table, double f_target,
                                     Eigen::VectorXd x0, double c0, const NewtonOptions& opts = {});
[[nodiscard]] SagResult solve_at_sag(const Problem& problem, double f_target, Eigen::VectorXd x0, double c0,
                                     const NewtonOptions& opts = {});

struct DeltaDiagnostic
{
  std::vector<double> at_probes;
  double max_on_grid = 0.0;
};

inline constexpr int kDeltaGridSize = 101;

/// |k1 T1 + k2 T2 - Q| / |C| at s in [0, 1]; s = 0 uses the pole limits. Throws when C = 0.
[[nodiscard]] double delta_at(const SolutionState& state, const MaterialParams& mat, double s);

/// Pointwise delta at the probes and its maximum over 101 interior midpoints.
[[nodiscard]] DeltaDiagnostic delta_diagnostic(const SolutionState& state, const MaterialParams& mat,
                                               const std::vector<double>& probes);

/// Fills the delta fields of a report for a converged state.
void attach_delta(SolveReport& report, const SolutionState& state, const MaterialParams& mat,
                  const std::vector<double>& probes);

/**
 * \brief Boundary-layer estimate of p1 from the edge stresses of a converged state:
 *        p1 = sqrt(D lambda1^2 |cos alpha| / T1) at s = 1, falling back to sqrt(D)
 *        without a state or when T1 <= 0. Throws for D <= 0.
 */
[[nodiscard]] double init_p1(const SolutionState* previous, const LoadParams& load, const MaterialParams& mat);

struct OptimizeOptions
{
  double tol_p = 1e-6;        ///< relative change of p that ends the outer iteration
  int max_outer = 40;
  double max_step_ratio = 0.5; ///< |dp| <= ratio * p per outer step
  NewtonOptions inner{1e-12, 25, false, 1e-14};
};

struct OuterStep
{
  std::vector<double> p;
  double functional = 0.0;
  std::vector<double> gradient;
  int inner_iterations = 0;
};

struct OptimizeResult
{
  std::vector<double> p;
  Eigen::VectorXd x;
  double functional = 0.0;
  SolveReport report;
  std::vector<OuterStep> history;
};

/**
 * \brief Outer iteration on dI/dp = 0 with a warm-started inner Newton solve at every
 *        trial p. One parameter uses a safeguarded secant; several use Broyden updates.
 *        A golden-section search on I(p1) is the fallback when the secant stalls.
 */
[[nodiscard]] OptimizeResult optimize_basis(const Problem& problem, std::vector<double> p0, Eigen::VectorXd x0,
                                            const OptimizeOptions& opts = {});

/**
 * \brief Adaptive solve from scratch: m = 1 solve at p1 = sqrt(D), refined p1 from the
 *        edge stresses, optimal p at m = 1, then embedding and optimisation at the
 *        requested m.
 */
[[nodiscard]] OptimizeResult solve_optimal_basis(const Problem& problem, const OptimizeOptions& opts = {});

} // namespace membrane
