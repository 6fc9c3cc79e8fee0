// SPDX-License-Identifier: Apache-2.0

/**
 * \file drivers.hpp
 * \brief Experiment drivers behind the command-line verbs and their file formats.
 */

#pragma once

#include "membrane/config.hpp"
#include "membrane/continuation.hpp"

#include <limits>
#include <string>
#include <vector>

namespace membrane {

/// One row of profile.csv.
struct ProfileRecord
{
  double s = 0.0;
  double z = 0.0;
  double r = 0.0;
  double dz = 0.0;
  double dr = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double delta = 0.0; ///< zero for C = 0, where every state with x = 0 is exact
};

inline constexpr int kProfilePoints = 201;

/// Records on the uniform grid s_i = i / (points - 1).
[[nodiscard]] std::vector<ProfileRecord> make_profile(const SolutionState& state, const MaterialParams& mat,
                                                      int points = kProfilePoints);

/// Problem described by a config at basis size m.
[[nodiscard]] Problem make_problem(const RunConfig& cfg, int m);

struct SolveOutcome
{
  SolutionState state;
  SolveReport report;
  double functional = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

/**
 * \brief Solves the configured problem at size m.
 *
 * Polynomial runs and adaptive runs with fixed p use Newton from the embedded m = 1
 * start. Adaptive runs without p also optimise the shape parameters. Solve failures
 * are returned in the report, never thrown.
 */
[[nodiscard]] SolveOutcome solve_once(const RunConfig& cfg, int m);

struct ConvergenceRow
{
  int m = 0;
  bool ok = false;
  double s = 0.0;
  ShapeEval at_probe;
  double delta = -1.0;
  double delta_max = -1.0;
  std::vector<double> p;
  std::string status;
};

/// One row per m in [m_min, m_max], evaluated at the first probe; rows run on cfg.jobs threads.
[[nodiscard]] std::vector<ConvergenceRow> convergence_rows(const RunConfig& cfg);

/// Load sweep over cfg.sweep; an empty range gives no points.
[[nodiscard]] ContinuationResult sweep_curve(const RunConfig& cfg);

struct DimensionalInputs
{
  double r0 = 1.0;     ///< undeformed radius
  double h0 = 1.0;     ///< undeformed thickness
  double c1 = 1.0;     ///< first Bidermann constant
  double rho = 0.0;    ///< liquid density
  double g = 9.81;     ///< gravitational acceleration
  double p_star = 0.0; ///< pressure on the liquid surface
  double p0 = 0.0;     ///< pressure on the other face
};

struct ScaledLoad
{
  double c = 0.0;
  double d = 0.0;
};

/// C = (P* - P0) R0 / (2 C1 h0), D = rho g R0^2 / (2 C1 h0). Throws unless R0, h0, C1 > 0.
[[nodiscard]] ScaledLoad scale_inputs(const DimensionalInputs& in);

/// Inverse of scale_inputs: fills p_star and rho of `reference` from a dimensionless load.
[[nodiscard]] DimensionalInputs unscale_inputs(const ScaledLoad& load, DimensionalInputs reference);

[[nodiscard]] std::string profile_csv(const std::vector<ProfileRecord>& rows);
[[nodiscard]] std::string table_csv(const std::vector<ConvergenceRow>& rows);
[[nodiscard]] std::string loadsag_csv(const std::vector<ContinuationPoint>& points);
[[nodiscard]] std::string report_json(const SolveReport& report);
[[nodiscard]] std::string solution_json(const SolveOutcome& outcome, const RunConfig& cfg);

/// Exit codes shared by the command-line verbs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolve = 3;

/// solve verb: solution.json, profile.csv and report.json in cfg.out_dir.
[[nodiscard]] int run_solve(const RunConfig& cfg);
/// converge verb: table.csv in cfg.out_dir.
[[nodiscard]] int run_convergence(const RunConfig& cfg);
/// sweep verb: loadsag.csv and sweep.json in cfg.out_dir.
[[nodiscard]] int run_sweep(const RunConfig& cfg);

} // namespace membrane
