// SPDX-License-Identifier: Apache-2.0

#include "membrane/continuation.hpp"

#include <algorithm>
#include <cmath>

namespace membrane {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Linear extrapolation of (x, C) through the last two points in the coordinate t.
Eigen::VectorXd extrapolate(const ContinuationPoint& prev, const ContinuationPoint& last, double t_prev,
                            double t_last, double t_new) {
  if (t_last == t_prev)
    return last.x;
  return last.x + (last.x - prev.x) * ((t_new - t_last) / (t_last - t_prev));
}

} // namespace

int count_folds(const std::vector<ContinuationPoint>& points) {
  int folds = 0, last = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double df = points[i].sag - points[i - 1].sag;
    const double dc = points[i].c_value - points[i - 1].c_value;
    const int sg = df == 0.0 ? 0 : sign_of(dc / df);
    if (sg == 0)
      continue;
    if (last != 0 && sg != last)
      ++folds;
    last = sg;
  }
  return folds;
}

ContinuationResult continue_in_load(const Problem& problem, double c_start, double c_end, const StepPolicy& policy,
                                    std::optional<Eigen::VectorXd> x_start, const NewtonOptions& newton) {
  ContinuationResult out;
  auto& pts = out.points;
  const BasisTable table(problem.basis, problem.effective_rule());
  const Eigen::VectorXd e = pole_functional(problem.basis);
  const double d = problem.load.d;

  const auto make_point = [&](double c, Eigen::VectorXd x, Parametrization via, int its) {
    ContinuationPoint p;
    p.c_value = c;
    p.sag = e.dot(x);
    p.x = std::move(x);
    p.via = via;
    p.iterations = its;
    return p;
  };

  // First point.
  {
    const Problem at = problem.with_load({c_start, d});
    Eigen::VectorXd x0;
    try {
      x0 = x_start ? *x_start : initial_guess(at);
    } catch (const SolveFailure& err) {
      out.message = err.what();
      return out;
    }
    const auto res = newton_solve(at, table, x0, newton);
    if (!res.report.converged) {
      out.message = "no converged solution at the starting load: " + res.report.message;
      return out;
    }
    pts.push_back(make_point(c_start, res.x, Parametrization::load, res.report.iterations));
  }

  const double dir = c_end > c_start ? 1.0 : (c_end < c_start ? -1.0 : 0.0);
  if (dir == 0.0) {
    out.complete = true;
    return out;
  }

  Parametrization mode = Parametrization::load;
  double h = policy.initial_step, hf = policy.sag_step;
  double sdir = 1.0;
  int easy = 0, folds_in_sag = 0, last_sign = 0;

  const auto enter_sag_mode = [&] {
    mode = Parametrization::sag;
    hf = policy.sag_step;
    easy = 0;
    folds_in_sag = 0;
    if (pts.size() >= 2) {
      const auto& a = pts[pts.size() - 2];
      const auto& b = pts.back();
      sdir = b.sag != a.sag ? (b.sag > a.sag ? 1.0 : -1.0) : dir;
      last_sign = b.sag != a.sag ? sign_of((b.c_value - a.c_value) / (b.sag - a.sag)) : 0;
    } else {
      sdir = dir * (pts.back().sag >= 0.0 ? 1.0 : -1.0);
      last_sign = 0;
    }
  };

  while (static_cast<int>(pts.size()) < policy.max_points) {
    const ContinuationPoint& last = pts.back();
    const ContinuationPoint* prev = pts.size() >= 2 ? &pts[pts.size() - 2] : nullptr;

    if (mode == Parametrization::load) {
      double c_new = last.c_value + dir * h;
      const bool final_step = dir * (c_new - c_end) >= 0.0;
      if (final_step)
        c_new = c_end;
      const Eigen::VectorXd guess = prev ? extrapolate(*prev, last, prev->c_value, last.c_value, c_new) : last.x;
      const auto res = newton_solve(problem.with_load({c_new, d}), table, guess, newton);
      const bool slow = res.report.iterations - 1 > policy.slow_iterations;
      const bool ill = res.report.condition_estimate > policy.max_condition;
      const bool jump = res.report.converged &&
                        std::hypot(c_new - last.c_value, e.dot(res.x) - last.sag) > policy.max_arclength;
      if (res.report.converged && !slow && !jump) {
        pts.push_back(make_point(c_new, res.x, Parametrization::load, res.report.iterations));
        if (final_step) {
          out.complete = true;
          break;
        }
        if (ill) {
          enter_sag_mode();
          continue;
        }
        if (++easy >= policy.easy_steps_to_grow) {
          h = std::min(2.0 * h, policy.max_step);
          easy = 0;
        }
        continue;
      }
      h *= 0.5;
      easy = 0;
      if (h < policy.min_step)
        enter_sag_mode();
      continue;
    }

    // Sag mode.
    const double f_new = last.sag + sdir * hf;
    Eigen::VectorXd guess = last.x;
    double c_guess = last.c_value;
    if (prev && last.sag != prev->sag) {
      guess = extrapolate(*prev, last, prev->sag, last.sag, f_new);
      c_guess = last.c_value + (last.c_value - prev->c_value) * (f_new - last.sag) / (last.sag - prev->sag);
    }
    const auto res = solve_at_sag(problem.with_load({c_guess, d}), table, f_new, guess, c_guess, newton);
    if (!res.report.converged || res.report.iterations - 1 > policy.slow_iterations ||
        std::hypot(res.c - last.c_value, f_new - last.sag) > policy.max_arclength) {
      hf *= 0.5;
      easy = 0;
      if (hf < policy.min_sag_step) {
        out.message = "both parametrisations failed near C = " + std::to_string(last.c_value) +
                      ", f = " + std::to_string(last.sag) + ": " + res.report.message;
        break;
      }
      continue;
    }

    ContinuationPoint p = make_point(res.c, res.x, Parametrization::sag, res.report.iterations);
    const double dc = p.c_value - last.c_value;
    const int sg = sign_of(dc / (p.sag - last.sag));
    if (sg != 0 && last_sign != 0 && sg != last_sign)
      ++folds_in_sag;
    if (sg != 0)
      last_sign = sg;

    if (dir * (p.c_value - c_end) >= 0.0) {
      // Crossed c_end: finish with the solution at c_end itself.
      const double t = (c_end - last.c_value) / dc;
      const Eigen::VectorXd x_mid = last.x + t * (p.x - last.x);
      const auto fin = newton_solve(problem.with_load({c_end, d}), table, x_mid, newton);
      if (fin.report.converged) {
        pts.push_back(make_point(c_end, fin.x, Parametrization::load, fin.report.iterations));
      } else {
        pts.push_back(std::move(p));
      }
      out.complete = true;
      break;
    }
    pts.push_back(std::move(p));
    if (++easy >= policy.easy_steps_to_grow) {
      hf = std::min(2.0 * hf, policy.max_sag_step);
      easy = 0;
    }
    if (folds_in_sag >= 1 && dir * dc > 0.0) {
      mode = Parametrization::load;
      h = std::clamp(std::abs(dc), policy.min_step, policy.max_step);
      easy = 0;
    }
  }
  if (!out.complete && out.message.empty())
    out.message = "point limit reached before the end of the load range";

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double df = pts[i + 1].sag - pts[i].sag;
    pts[i].stability_hint = df == 0.0 ? 0 : sign_of((pts[i + 1].c_value - pts[i].c_value) / df);
  }
  if (pts.size() >= 2)
    pts.back().stability_hint = pts[pts.size() - 2].stability_hint;
  return out;
}

} // namespace membrane
