// SPDX-License-Identifier: Apache-2.0

#include "membrane/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace membrane {

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Residual norm, or +inf when the trial shape is inadmissible.
double try_residual_norm(const Problem& pb, const BasisTable& table, const Eigen::VectorXd& x) {
  try {
    return inf_norm(residual(x, pb.load, pb.material, table));
  } catch (const AssemblyError&) {
    return std::numeric_limits<double>::infinity();
  }
}

double sign_or(double v, double fallback) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : fallback); }

} // namespace

Problem Problem::with_basis(BasisSpec b) const {
  Problem out = *this;
  out.basis = std::move(b);
  return out;
}

Problem Problem::with_load(LoadParams l) const {
  Problem out = *this;
  out.load = l;
  return out;
}

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
  case SolveStatus::converged: return "converged";
  case SolveStatus::max_iterations: return "max_iterations";
  case SolveStatus::singular_jacobian: return "singular_jacobian";
  case SolveStatus::non_finite: return "non_finite";
  case SolveStatus::diverged: return "diverged";
  }
  return "unknown";
}

SolveFailure::SolveFailure(const std::string& what, SolveReport r) : std::runtime_error(what), report(std::move(r)) {}

NewtonResult newton_solve(const Problem& problem, const BasisTable& table, Eigen::VectorXd x, const NewtonOptions& opts) {
  if (x.size() != table.spec().size())
    throw std::invalid_argument("initial coefficient vector length does not match 2m");
  SolveReport rep;
  const auto finish = [&](SolveStatus st, std::string msg) {
    rep.status = st;
    rep.converged = st == SolveStatus::converged;
    rep.iterations = static_cast<int>(rep.residual_history.size());
    rep.message = std::move(msg);
    return NewtonResult{std::move(x), std::move(rep)};
  };

  for (int k = 0;; ++k) {
    Eigen::VectorXd g;
    try {
      g = residual(x, problem.load, problem.material, table);
    } catch (const AssemblyError& e) {
      return finish(SolveStatus::non_finite, e.what());
    }
    const double gn = inf_norm(g);
    rep.residual_history.push_back(gn);
    if (gn <= opts.tol)
      return finish(SolveStatus::converged, {});
    if (k >= opts.max_iter)
      return finish(SolveStatus::max_iterations, "Newton iteration limit reached");

    Eigen::MatrixXd h;
    try {
      h = jacobian(x, problem.load, problem.material, table);
    } catch (const AssemblyError& e) {
      return finish(SolveStatus::non_finite, e.what());
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    const double rc = lu.rcond();
    rep.condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(rc > opts.singular_rcond))
      return finish(SolveStatus::singular_jacobian, "Jacobian is singular to working precision");
    Eigen::VectorXd dx = lu.solve(g);
    if (!all_finite(dx))
      return finish(SolveStatus::non_finite, "non-finite Newton correction");

    if (!opts.damped) {
      x -= dx;
      continue;
    }
    double t = 1.0;
    Eigen::VectorXd trial = x - dx;
    for (int halving = 0; halving < 30; ++halving) {
      if (try_residual_norm(problem, table, trial) < gn)
        break;
      t *= 0.5;
      trial = x - t * dx;
    }
    x = std::move(trial);
  }
}

NewtonResult newton_solve(const Problem& problem, Eigen::VectorXd x0, const NewtonOptions& opts) {
  const BasisTable table(problem.basis, problem.effective_rule());
  return newton_solve(problem, table, std::move(x0), opts);
}

Eigen::VectorXd embed(const Eigen::VectorXd& x, int m_from, int m_to) {
  if (x.size() != 2 * m_from)
    throw std::invalid_argument("embed: vector length does not match 2m");
  if (m_to < m_from)
    throw std::invalid_argument("embed: target size is smaller than the source size");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * m_to);
  out.head(m_from) = x.head(m_from);
  out.segment(m_to, m_from) = x.tail(m_from);
  return out;
}

Eigen::VectorXd initial_guess(const Problem& problem) {
  problem.basis.validate();
  const int m = problem.basis.m;
  if (problem.load.c == 0.0)
    return Eigen::VectorXd::Zero(2 * m);

  BasisSpec small = problem.basis;
  small.m = 1;
  Problem sub = problem.with_basis(small);
  if (problem.rule)
    sub.rule = problem.rule;
  const BasisTable table(small, sub.effective_rule());

  // Pole sag of the membrane carried either by liquid weight or by stretching.
  const double c = problem.load.c, d = problem.load.d;
  double f0 = 0.6 * std::cbrt(std::abs(c));
  if (d > 0.0)
    f0 = std::min(f0, std::abs(c) / d);
  f0 = std::copysign(f0, c);
  const double u1_pole = eval_u(1, 0.0, small).f;

  NewtonOptions opts;
  opts.damped = true;
  opts.max_iter = 60;

  const auto attempt = [&](double c_value, const Eigen::VectorXd& start) {
    return newton_solve(sub.with_load({c_value, d}), table, start, opts);
  };

  Eigen::VectorXd x1(2);
  x1 << f0 / u1_pole, 0.0;
  auto res = attempt(c, x1);
  if (!res.report.converged) {
    // Ramp the load from a tenth of its value with warm starts.
    Eigen::VectorXd xr(2);
    xr << 0.1 * f0 / u1_pole, 0.0;
    const int steps = 20;
    for (int i = 1; i <= steps; ++i) {
      res = attempt(c * i / steps, xr);
      if (!res.report.converged)
        break;
      xr = res.x;
    }
  }
  if (!res.report.converged)
    throw SolveFailure("the two-unknown starting solve did not converge; reduce C or start a load sweep from a "
                       "smaller C",
                       res.report);
  return embed(res.x, 1, m);
}

NewtonResult solve_direct(const Problem& problem, const NewtonOptions& opts) {
  const BasisTable table(problem.basis, problem.effective_rule());
  const Eigen::VectorXd x0 = initial_guess(problem);
  auto first = newton_solve(problem, table, x0, opts);
  if (first.report.converged || opts.damped || first.report.status == SolveStatus::singular_jacobian)
    return first;
  NewtonOptions retry = opts;
  retry.damped = true;
  retry.max_iter = 2 * opts.max_iter;
  auto second = newton_solve(problem, table, x0, retry);
  // The report accounts for both attempts.
  auto& hist = second.report.residual_history;
  hist.insert(hist.begin(), first.report.residual_history.begin(), first.report.residual_history.end());
  second.report.iterations = static_cast<int>(hist.size());
  const std::string why = "full Newton steps failed (" + first.report.message + "); retried with damping";
  second.report.message = second.report.message.empty() ? why : why + ": " + second.report.message;
  return second;
}

Eigen::VectorXd pole_functional(const BasisSpec& spec) {
  spec.validate();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(spec.size());
  for (int k = 1; k <= spec.m; ++k)
    e[k - 1] = eval_u(k, 0.0, spec).f;
  return e;
}

SagResult solve_at_sag(const Problem& problem, const BasisTable& table, double f_target, Eigen::VectorXd x,
                       double c, const NewtonOptions& opts) {
  const Eigen::Index n = table.spec().size();
  if (x.size() != n)
    throw std::invalid_argument("initial coefficient vector length does not match 2m");
  const Eigen::VectorXd e = pole_functional(table.spec());
  SolveReport rep;
  const auto finish = [&](SolveStatus st, std::string msg) {
    rep.status = st;
    rep.converged = st == SolveStatus::converged;
    rep.iterations = static_cast<int>(rep.residual_history.size());
    rep.message = std::move(msg);
    return SagResult{std::move(x), c, std::move(rep)};
  };

  for (int k = 0;; ++k) {
    const LoadParams load{c, problem.load.d};
    Eigen::VectorXd f(n + 1);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
    try {
      f.head(n) = residual(x, load, problem.material, table);
      f[n] = e.dot(x) - f_target;
      const double fn = inf_norm(f);
      rep.residual_history.push_back(fn);
      if (fn <= opts.tol)
        return finish(SolveStatus::converged, {});
      if (k >= opts.max_iter)
        return finish(SolveStatus::max_iterations, "Newton iteration limit reached");
      j.topLeftCorner(n, n) = jacobian(x, load, problem.material, table);
      j.topRightCorner(n, 1) = load_gradient(x, load, problem.material, table);
    } catch (const AssemblyError& err) {
      return finish(SolveStatus::non_finite, err.what());
    }
    j.bottomLeftCorner(1, n) = e.transpose();

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
    const double rc = lu.rcond();
    rep.condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(rc > opts.singular_rcond))
      return finish(SolveStatus::singular_jacobian, "bordered matrix is singular to working precision");
    const Eigen::VectorXd step = lu.solve(f);
    if (!all_finite(step))
      return finish(SolveStatus::non_finite, "non-finite Newton correction");
    x -= step.head(n);
    c -= step[n];
  }
}

SagResult solve_at_sag(const Problem& problem, double f_target, Eigen::VectorXd x0, double c0,
                       const NewtonOptions& opts) {
  const BasisTable table(problem.basis, problem.effective_rule());
  return solve_at_sag(problem, table, f_target, std::move(x0), c0, opts);
}

double delta_at(const SolutionState& state, const MaterialParams& mat, double s) {
  if (state.load.c == 0.0)
    throw std::domain_error("delta diagnostic is undefined for C = 0");
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error("delta probe must lie in [0, 1]");
  const ShapeEval sh = eval_shape(state, s);
  const StretchState st = s == 0.0 ? pole_stretches(sh) : stretches(sh, s);
  const Curvatures k = s == 0.0 ? pole_curvatures(sh) : curvatures(sh);
  const PrincipalStresses t = principal_stresses(st, mat);
  return std::abs(k.k1 * t.t1 + k.k2 * t.t2 - hydro_load(sh.z, state.load)) / std::abs(state.load.c);
}

DeltaDiagnostic delta_diagnostic(const SolutionState& state, const MaterialParams& mat,
                                 const std::vector<double>& probes) {
  DeltaDiagnostic out;
  out.at_probes.reserve(probes.size());
  for (double s : probes)
    out.at_probes.push_back(delta_at(state, mat, s));
  for (int i = 0; i < kDeltaGridSize; ++i)
    out.max_on_grid = std::max(out.max_on_grid, delta_at(state, mat, (i + 0.5) / kDeltaGridSize));
  return out;
}

void attach_delta(SolveReport& report, const SolutionState& state, const MaterialParams& mat,
                  const std::vector<double>& probes) {
  report.probes = probes;
  if (state.load.c == 0.0) {
    report.probe_deltas.assign(probes.size(), 0.0);
    report.delta_at = probes.empty() ? -1.0 : 0.0;
    report.delta_max = 0.0;
    return;
  }
  const auto d = delta_diagnostic(state, mat, probes);
  report.probe_deltas = d.at_probes;
  report.delta_at = d.at_probes.empty() ? -1.0 : d.at_probes.front();
  report.delta_max = d.max_on_grid;
}

double init_p1(const SolutionState* previous, const LoadParams& load, const MaterialParams& mat) {
  if (!(load.d > 0.0))
    throw std::invalid_argument("the adaptive basis needs D > 0; use the polynomial family for D = 0");
  const double fallback = std::sqrt(load.d);
  if (previous == nullptr)
    return fallback;
  const ShapeEval sh = eval_shape(*previous, 1.0);
  const StretchState st = stretches(sh, 1.0);
  const double t1 = principal_stresses(st, mat).t1;
  if (!(t1 > 0.0))
    return fallback;
  const double cos_a = sh.dr / st.lambda1;
  const double p = std::sqrt(load.d * st.lambda1 * st.lambda1 * std::abs(cos_a) / t1);
  if (!std::isfinite(p))
    return fallback;
  return std::max(p, kMinShapeParameter);
}

namespace {

// Inner solve at one trial p together with I and dI/dp.
struct Trial
{
  std::vector<double> p;
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  SolveReport inner;
  bool ok = false;
};

class OuterProblem
{
public:
  OuterProblem(const Problem& pb, const OptimizeOptions& opts)
      : pb_(pb), opts_(opts), rule_(pb.effective_rule()) {}

  Trial evaluate(const std::vector<double>& p, const Eigen::VectorXd& warm) {
    Trial t;
    t.p = p;
    BasisSpec spec = pb_.basis;
    spec.p = p;
    try {
      spec.validate();
      const BasisTable table(spec, rule_, true);
      auto res = newton_solve(pb_.with_basis(spec), table, warm, opts_.inner);
      t.inner = res.report;
      inner_counts.push_back(res.report.iterations);
      if (!res.report.converged)
        return t;
      t.x = std::move(res.x);
      t.value = functional_value(t.x, pb_.load, pb_.material, table);
      t.grad = p_gradient(t.x, pb_.load, pb_.material, table);
      t.ok = std::isfinite(t.value) && t.grad.allFinite();
    } catch (const std::exception& e) {
      t.inner.message = e.what();
      t.ok = false;
    }
    if (t.ok)
      history.push_back({t.p, t.value, {t.grad.data(), t.grad.data() + t.grad.size()}, t.inner.iterations});
    return t;
  }

  // Retries a failed trial by pulling p back towards a good point.
  Trial evaluate_backtracking(std::vector<double> p, const Trial& from) {
    for (int i = 0; i < 8; ++i) {
      Trial t = evaluate(p, from.x);
      if (t.ok)
        return t;
      for (std::size_t j = 0; j < p.size(); ++j)
        p[j] = 0.5 * (p[j] + from.p[j]);
    }
    return {};
  }

  const OptimizeOptions& opts() const { return opts_; }

  std::vector<OuterStep> history;
  std::vector<int> inner_counts;

private:
  Problem pb_;
  OptimizeOptions opts_;
  QuadratureRule rule_;
};

double clip_p1(double p) { return std::max(p, kMinShapeParameter); }

// Golden-section search on I(p1), warm-starting each solve from the nearest success.
Trial golden_section(OuterProblem& op, const Trial& best_in, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  Trial best = best_in;
  lo = clip_p1(lo);
  const auto eval = [&](double p1) {
    std::vector<double> p = best.p;
    p[0] = p1;
    Trial t = op.evaluate(p, best.x);
    if (t.ok && t.value < best.value)
      best = t;
    return t.ok ? t.value : std::numeric_limits<double>::infinity();
  };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while ((b - a) > op.opts().tol_p * std::max(1.0, best.p[0])) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  return best;
}

Trial secant_scalar(OuterProblem& op, Trial a, SolveReport& rep) {
  const auto& opts = op.opts();
  double lo = 0.0, hi = std::numeric_limits<double>::infinity(); // bracket of the root of dI/dp
  const auto update_bracket = [&](const Trial& t) {
    if (t.grad[0] < 0.0)
      lo = std::max(lo, t.p[0]);
    else if (t.grad[0] > 0.0)
      hi = std::min(hi, t.p[0]);
  };
  update_bracket(a);
  if (a.grad[0] == 0.0) {
    rep.converged = true;
    return a;
  }

  std::vector<double> pb = a.p;
  pb[0] = clip_p1(a.p[0] * (1.0 - 0.1 * sign_or(a.grad[0], 1.0)));
  Trial b = op.evaluate_backtracking(pb, a);
  if (!b.ok) {
    rep.message = "inner solve failed at every trial p near the start";
    return a;
  }
  update_bracket(b);

  for (int it = 0; it < opts.max_outer; ++it) {
    rep.outer_iterations = it + 1;
    const double pa = a.p[0], pbv = b.p[0];
    if (std::abs(pbv - pa) <= opts.tol_p * std::abs(pbv) || b.grad[0] == 0.0) {
      rep.converged = true;
      return b;
    }
    const double ga = a.grad[0], gb = b.grad[0];
    const double slope = (gb - ga) / (pbv - pa);
    double pn;
    if (slope > 0.0 && std::isfinite(slope))
      pn = pbv - gb / slope;
    else
      pn = pbv * (1.0 - opts.max_step_ratio * sign_or(gb, 1.0));
    if (std::isfinite(hi) && lo > 0.0 && !(pn > lo && pn < hi))
      pn = 0.5 * (lo + hi);
    pn = std::clamp(pn, pbv * (1.0 - opts.max_step_ratio), pbv * (1.0 + opts.max_step_ratio));
    pn = clip_p1(pn);
    if (pn == pbv) {
      rep.converged = true;
      return b;
    }
    std::vector<double> p = b.p;
    p[0] = pn;
    Trial c = op.evaluate_backtracking(p, b);
    if (!c.ok) {
      rep.message = "inner solve failed at a trial p";
      break;
    }
    update_bracket(c);
    a = std::move(b);
    b = std::move(c);
  }

  // Stagnation: golden section on I(p1) around the best point seen.
  const Trial& best = a.value < b.value ? a : b;
  const double glo = lo > 0.0 ? lo : 0.5 * best.p[0];
  const double ghi = std::isfinite(hi) ? hi : 2.0 * best.p[0];
  Trial g = golden_section(op, best, glo, ghi);
  rep.converged = true;
  rep.message = "secant stalled; golden-section fallback on I(p1)";
  return g;
}

Trial broyden(OuterProblem& op, Trial a, SolveReport& rep) {
  const auto& opts = op.opts();
  const auto n = static_cast<Eigen::Index>(a.p.size());
  // Initial Hessian by one-sided differences of the gradient.
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> p = a.p;
    const double h = 1e-3 * std::max(1.0, std::abs(p[j]));
    p[j] += h;
    Trial t = op.evaluate(p, a.x);
    if (!t.ok) {
      rep.message = "inner solve failed while building the initial secant matrix";
      return a;
    }
    b.col(j) = (t.grad - a.grad) / h;
  }
  b = 0.5 * (b + b.transpose()).eval();

  for (int it = 0; it < opts.max_outer; ++it) {
    rep.outer_iterations = it + 1;
    Eigen::VectorXd step = -b.fullPivLu().solve(a.grad);
    if (!step.allFinite() || step.dot(a.grad) >= 0.0)
      step = -a.grad / std::max(a.grad.norm(), 1e-300) * 0.1 * std::max(1.0, std::abs(a.p[0]));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double cap = opts.max_step_ratio * std::max(std::abs(a.p[j]), 1.0);
      step[j] = std::clamp(step[j], -cap, cap);
    }
    std::vector<double> p = a.p;
    for (Eigen::Index j = 0; j < n; ++j)
      p[j] += step[j];
    p[0] = clip_p1(p[0]);
    Trial c = op.evaluate_backtracking(p, a);
    if (!c.ok) {
      rep.message = "inner solve failed at a trial p";
      return a;
    }
    Eigen::VectorXd s(n);
    double rel = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      s[j] = c.p[j] - a.p[j];
      rel = std::max(rel, std::abs(s[j]) / std::max(std::abs(c.p[j]), 1.0));
    }
    if (rel <= opts.tol_p) {
      rep.converged = true;
      return c;
    }
    const Eigen::VectorXd y = c.grad - a.grad;
    b += ((y - b * s) * s.transpose()) / s.squaredNorm();
    a = std::move(c);
  }
  rep.message = "Broyden iteration limit reached";
  return a;
}

} // namespace

OptimizeResult optimize_basis(const Problem& problem, std::vector<double> p0, Eigen::VectorXd x0,
                              const OptimizeOptions& opts) {
  if (!problem.basis.is_adaptive())
    throw std::invalid_argument("optimize_basis requires the adaptive family");
  if (p0.empty())
    throw std::invalid_argument("optimize_basis needs at least one shape parameter");
  p0[0] = clip_p1(p0[0]);

  OuterProblem op(problem, opts);
  Trial start = op.evaluate(p0, x0);
  if (!start.ok) {
    SolveReport rep = start.inner;
    rep.converged = false;
    throw SolveFailure("inner Newton solve failed at the starting shape parameters", rep);
  }

  SolveReport outer;
  Trial best = p0.size() == 1 ? secant_scalar(op, start, outer) : broyden(op, start, outer);

  OptimizeResult out;
  out.p = best.p;
  out.x = best.x;
  out.functional = best.value;
  out.history = op.history;
  out.report = best.inner;
  out.report.converged = best.inner.converged && outer.converged;
  if (!out.report.converged && out.report.status == SolveStatus::converged)
    out.report.status = SolveStatus::max_iterations;
  out.report.outer_iterations = outer.outer_iterations;
  out.report.inner_iterations = op.inner_counts;
  out.report.final_p = best.p;
  out.report.message = outer.message;
  return out;
}

OptimizeResult solve_optimal_basis(const Problem& problem, const OptimizeOptions& opts) {
  if (!problem.basis.is_adaptive())
    throw std::invalid_argument("solve_optimal_basis requires the adaptive family");
  const std::size_t n = std::max<std::size_t>(problem.basis.p.size(), 1);
  const int m = problem.basis.m;

  std::vector<double> p(n, 0.0);
  p[0] = init_p1(nullptr, problem.load, problem.material);

  BasisSpec small = BasisSpec::adaptive(1, p);
  Problem sub = problem.with_basis(small);
  if (!problem.rule)
    sub.rule = auto_rule(small);
  Eigen::VectorXd x1 = initial_guess(sub);
  {
    // Boundary-layer refinement of p1 from the first converged state.
    const auto res = newton_solve(sub, x1, opts.inner);
    if (res.report.converged) {
      x1 = res.x;
      const SolutionState st{x1, small, problem.load};
      p[0] = init_p1(&st, problem.load, problem.material);
    }
  }
  OptimizeResult first = optimize_basis(sub, p, x1, opts);
  if (m == 1)
    return first;

  Problem full = problem;
  full.basis.p = first.p;
  if (!problem.rule)
    full.rule = auto_rule(full.basis);
  return optimize_basis(full, first.p, embed(first.x, 1, m), opts);
}

} // namespace membrane
