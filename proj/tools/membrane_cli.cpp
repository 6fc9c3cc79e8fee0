// SPDX-License-Identifier: Apache-2.0

// Command-line front end: solve, converge, sweep and scale.

#include "membrane/drivers.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <iostream>

namespace {

using namespace membrane;

struct CommonFlags
{
  std::string config;
  std::string out;
  int quad = 0;
  std::vector<double> probes;
  int jobs = 0;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "configuration file (key = value or JSON)")->required();
  sub->add_option("--out", f.out, "output directory (overrides 'out')");
  sub->add_option("--quad", f.quad, "Gauss nodes (overrides 'quad')");
  sub->add_option("--probe", f.probes, "probe point s, repeatable (overrides 'probes')");
  sub->add_option("--jobs", f.jobs, "worker threads for independent rows");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = load_config(f.config);
  if (!f.out.empty())
    cfg.out_dir = f.out;
  if (f.quad != 0)
    cfg.quad = f.quad;
  if (!f.probes.empty())
    cfg.probes = f.probes;
  if (f.jobs != 0)
    cfg.jobs = f.jobs;
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric hyperelastic membrane under hydrostatic load (Ritz method)"};
  app.require_subcommand(1);

  CommonFlags solve_f, conv_f, sweep_f;
  auto* solve = app.add_subcommand("solve", "single solve: solution.json, profile.csv, report.json");
  add_common(solve, solve_f);
  auto* conv = app.add_subcommand("converge", "one table row per m: table.csv");
  add_common(conv, conv_f);
  auto* sweep = app.add_subcommand("sweep", "load-sag curve through folds: loadsag.csv");
  add_common(sweep, sweep_f);

  DimensionalInputs dim;
  auto* scale = app.add_subcommand("scale", "dimensionless C and D from dimensional inputs");
  scale->add_option("--r0", dim.r0, "undeformed radius")->required();
  scale->add_option("--h0", dim.h0, "undeformed thickness")->required();
  scale->add_option("--c1", dim.c1, "first material constant")->required();
  scale->add_option("--rho", dim.rho, "liquid density");
  scale->add_option("--g", dim.g, "gravitational acceleration");
  scale->add_option("--pstar", dim.p_star, "pressure on the liquid surface");
  scale->add_option("--p0", dim.p0, "pressure on the other face");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*scale) {
      const auto s = scale_inputs(dim);
      fmt::print("c = {:.17g}\nd = {:.17g}\n", s.c, s.d);
      return kExitOk;
    }
    if (*solve)
      return run_solve(resolve(solve_f));
    if (*conv)
      return run_convergence(resolve(conv_f));
    if (*sweep)
      return run_sweep(resolve(sweep_f));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolve;
  }
  return kExitConfig;
}
