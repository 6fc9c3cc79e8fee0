// SPDX-License-Identifier: Apache-2.0

#include "membrane/drivers.hpp"

#include "json.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

namespace membrane {

namespace {

using nlohmann::json;

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

json report_to_json(const SolveReport& r) {
  json j;
  j["status"] = std::string(to_string(r.status));
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual_history"] = r.residual_history;
  j["condition_estimate"] = std::isfinite(r.condition_estimate) ? json(r.condition_estimate) : json(nullptr);
  j["probes"] = r.probes;
  j["probe_deltas"] = r.probe_deltas;
  j["delta_at"] = r.delta_at >= 0.0 ? json(r.delta_at) : json(nullptr);
  j["delta_max"] = r.delta_max >= 0.0 ? json(r.delta_max) : json(nullptr);
  j["final_p"] = r.final_p ? json(*r.final_p) : json(nullptr);
  j["outer_iterations"] = r.outer_iterations;
  j["inner_iterations"] = r.inner_iterations;
  j["message"] = r.message;
  return j;
}

std::string_view family_name(BasisFamily f) { return f == BasisFamily::adaptive ? "adaptive" : "polynomial"; }

} // namespace

std::vector<ProfileRecord> make_profile(const SolutionState& state, const MaterialParams& mat, int points) {
  if (points < 2)
    throw std::invalid_argument("a profile needs at least two points");
  std::vector<ProfileRecord> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    const ShapeEval sh = eval_shape(state, s);
    const StretchState st = s == 0.0 ? pole_stretches(sh) : stretches(sh, s);
    const PrincipalStresses t = principal_stresses(st, mat);
    ProfileRecord rec;
    rec.s = s;
    rec.z = sh.z;
    rec.r = sh.r;
    rec.dz = sh.dz;
    rec.dr = sh.dr;
    rec.lambda1 = st.lambda1;
    rec.lambda2 = st.lambda2;
    rec.t1 = t.t1;
    rec.t2 = t.t2;
    rec.delta = state.load.c == 0.0 ? 0.0 : delta_at(state, mat, s);
    rows.push_back(rec);
  }
  return rows;
}

Problem make_problem(const RunConfig& cfg, int m) {
  Problem pb{cfg.material, cfg.load, cfg.basis(m), std::nullopt};
  if (cfg.quad)
    pb.rule = gauss_rule(*cfg.quad);
  return pb;
}

SolveOutcome solve_once(const RunConfig& cfg, int m) {
  SolveOutcome out;
  const Problem pb = make_problem(cfg, m);
  out.state.spec = pb.basis;
  out.state.load = pb.load;
  out.state.x = Eigen::VectorXd::Zero(pb.basis.size());
  try {
    if (pb.basis.is_adaptive() && !cfg.p) {
      auto res = solve_optimal_basis(pb);
      out.state.spec.p = res.p;
      out.state.x = res.x;
      out.report = res.report;
      out.functional = res.functional;
    } else {
      auto res = solve_direct(pb);
      out.state.x = res.x;
      out.report = res.report;
      if (res.report.converged)
        out.functional = functional_value(out.state, pb.material, pb.effective_rule());
      if (pb.basis.is_adaptive())
        out.report.final_p = pb.basis.p;
    }
  } catch (const SolveFailure& e) {
    out.report = e.report;
    out.report.converged = false;
    out.report.message = e.what();
    return out;
  } catch (const std::exception& e) {
    out.report.converged = false;
    out.report.message = e.what();
    return out;
  }
  out.ok = out.report.converged;
  if (out.ok)
    attach_delta(out.report, out.state, cfg.material, cfg.probes);
  return out;
}

std::vector<ConvergenceRow> convergence_rows(const RunConfig& cfg) {
  const int count = cfg.m_max - cfg.m_min + 1;
  std::vector<ConvergenceRow> rows(static_cast<std::size_t>(count));
  const double probe = cfg.probes.empty() ? 0.5 : cfg.probes.front();
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      auto& row = rows[static_cast<std::size_t>(i)];
      row.m = cfg.m_min + i;
      row.s = probe;
      RunConfig one = cfg;
      one.probes = {probe};
      const auto res = solve_once(one, row.m);
      row.ok = res.ok;
      row.status = res.ok ? "converged" : std::string(to_string(res.report.status));
      row.p = res.state.spec.p;
      if (res.ok) {
        row.at_probe = eval_shape(res.state, probe);
        row.delta = res.report.delta_at;
        row.delta_max = res.report.delta_max;
      }
    }
  };
  const int threads = std::min(cfg.jobs, count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }
  return rows;
}

ContinuationResult sweep_curve(const RunConfig& cfg) {
  if (!cfg.sweep)
    throw ConfigError("sweep needs c_start and c_end");
  const SweepRange& sw = *cfg.sweep;
  if (sw.c_start == sw.c_end)
    return {{}, true, "empty load range"};

  Problem pb = make_problem(cfg, cfg.m);
  pb.load.c = sw.c_start;
  if (pb.basis.is_adaptive() && !cfg.p) {
    // Shape parameters are optimised once at the first load and then held fixed.
    const auto first = solve_optimal_basis(pb);
    pb.basis.p = first.p;
  }
  StepPolicy policy;
  policy.initial_step = sw.c_step;
  policy.max_step = std::max(policy.max_step, sw.c_step);
  policy.sag_step = sw.sag_step;
  policy.max_sag_step = std::max(policy.max_sag_step, sw.sag_step);
  return continue_in_load(pb, sw.c_start, sw.c_end, policy);
}

ScaledLoad scale_inputs(const DimensionalInputs& in) {
  if (!(in.r0 > 0.0) || !(in.h0 > 0.0) || !(in.c1 > 0.0))
    throw std::invalid_argument("R0, h0 and C1 must be positive");
  const double stress_scale = 2.0 * in.c1 * in.h0;
  return {(in.p_star - in.p0) * in.r0 / stress_scale, in.rho * in.g * in.r0 * in.r0 / stress_scale};
}

DimensionalInputs unscale_inputs(const ScaledLoad& load, DimensionalInputs ref) {
  if (!(ref.r0 > 0.0) || !(ref.h0 > 0.0) || !(ref.c1 > 0.0) || !(ref.g > 0.0))
    throw std::invalid_argument("R0, h0, C1 and g must be positive");
  const double stress_scale = 2.0 * ref.c1 * ref.h0;
  ref.p_star = ref.p0 + load.c * stress_scale / ref.r0;
  ref.rho = load.d * stress_scale / (ref.g * ref.r0 * ref.r0);
  return ref;
}

std::string profile_csv(const std::vector<ProfileRecord>& rows) {
  std::string out = "s,z,r,dz,dr,lambda1,lambda2,T1,T2,delta\n";
  for (const auto& r : rows)
    out += fmt::format("{:.6f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f},{:.6e}\n", r.s, r.z,
                       r.r, r.dz, r.dr, r.lambda1, r.lambda2, r.t1, r.t2, r.delta);
  return out;
}

std::string table_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "m,s,z,r,neg_dz,dr,neg_d2z,neg_d2r,delta,delta_max,p1,status\n";
  for (const auto& r : rows) {
    const std::string p1 = r.p.empty() ? "" : fmt::format("{:.8f}", r.p.front());
    if (!r.ok) {
      out += fmt::format("{},{:.6f},,,,,,,,,{},{}\n", r.m, r.s, p1, r.status);
      continue;
    }
    const auto& a = r.at_probe;
    out += fmt::format("{},{:.6f},{:.10f},{:.10f},{:.10f},{:.10f},{:.10f},{:.10f},{:.6e},{:.6e},{},{}\n", r.m, r.s,
                       a.z, a.r, -a.dz, a.dr, -a.d2z, -a.d2r, r.delta, r.delta_max, p1, r.status);
  }
  return out;
}

std::string loadsag_csv(const std::vector<ContinuationPoint>& points) {
  std::string out = "c,f,stability_hint,parametrization,iterations\n";
  for (const auto& p : points)
    out += fmt::format("{:.12f},{:.12f},{},{},{}\n", p.c_value, p.sag, p.stability_hint,
                       p.via == Parametrization::sag ? "sag" : "load", p.iterations);
  return out;
}

std::string report_json(const SolveReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::string solution_json(const SolveOutcome& outcome, const RunConfig& cfg) {
  const auto& st = outcome.state;
  const int m = st.spec.m;
  std::vector<double> xz(st.x.data(), st.x.data() + m), xr(st.x.data() + m, st.x.data() + 2 * m);
  json j;
  j["family"] = std::string(family_name(st.spec.family));
  j["m"] = m;
  j["p"] = st.spec.p;
  j["gamma"] = {cfg.material.gamma1, cfg.material.gamma2, cfg.material.gamma3};
  j["c"] = st.load.c;
  j["d"] = st.load.d;
  j["x_z"] = xz;
  j["x_r"] = xr;
  j["converged"] = outcome.ok;
  j["functional"] = std::isfinite(outcome.functional) ? json(outcome.functional) : json(nullptr);
  j["sag"] = outcome.ok ? json(eval_shape(st, 0.0).z) : json(nullptr);
  return j.dump(2) + "\n";
}

int run_solve(const RunConfig& cfg) {
  const auto out = solve_once(cfg, cfg.m);
  write_file(cfg.out_dir, "report.json", report_json(out.report));
  if (!out.ok)
    return kExitSolve;
  write_file(cfg.out_dir, "solution.json", solution_json(out, cfg));
  write_file(cfg.out_dir, "profile.csv", profile_csv(make_profile(out.state, cfg.material)));
  return kExitOk;
}

int run_convergence(const RunConfig& cfg) {
  const auto rows = convergence_rows(cfg);
  write_file(cfg.out_dir, "table.csv", table_csv(rows));
  for (const auto& r : rows)
    if (!r.ok)
      return kExitSolve;
  return kExitOk;
}

int run_sweep(const RunConfig& cfg) {
  ContinuationResult res;
  try {
    res = sweep_curve(cfg);
  } catch (const SolveFailure& e) {
    res.message = e.what();
  }
  write_file(cfg.out_dir, "loadsag.csv", loadsag_csv(res.points));
  json j;
  j["complete"] = res.complete;
  j["message"] = res.message;
  j["points"] = res.points.size();
  j["folds"] = count_folds(res.points);
  write_file(cfg.out_dir, "sweep.json", j.dump(2) + "\n");
  return res.complete ? kExitOk : kExitSolve;
}

} // namespace membrane
