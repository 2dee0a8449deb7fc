// Command-line front end: solve, flow, measure, john, diag, experiment.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "logmink/config.hpp"
#include "logmink/ellipsoid.hpp"
#include "logmink/experiments.hpp"
#include "logmink/gcf_flow.hpp"
#include "logmink/ma_solver.hpp"
#include "logmink/polytope.hpp"
#include "logmink/support.hpp"

namespace fs = std::filesystem;
using namespace logmink;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

const char* kExitCodes =
    "Exit codes:\n"
    "  0  success (solve: final residual <= tol; experiment: suite property holds)\n"
    "  1  computation failed (no convergence, convexity lost, degenerate input, suite property violated)\n"
    "  2  usage or configuration error (unknown flag or key, malformed value, unreadable input)\n"
    "Flags override values read from --config. Artifacts are written atomically under --out.";

/// Raw flag values keyed by config key; only flags given on the command line are applied.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }

  Config resolve() const {
    Config cfg;
    if (!config_path.empty()) cfg = parse_config(io::read_file(config_path));
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) cfg.set(key, values.at(key));
    return cfg;
  }
};

void add_common(CLI::App* app, FlagSet& flags) {
  app->add_option("--config", flags.config_path, "key = value config file (flags override it)")->check(CLI::ExistingFile);
  flags.add(app, "--grid-L", "grid_L", "grid bandwidth L (L rings x 2L longitudes, degrees < L)");
  flags.add(app, "--out", "out", "output directory (created if missing)");
}

void add_density(CLI::App* app, FlagSet& flags) {
  flags.add(app, "--f", "f", "density: const:c | harmonics:[(l,m,amp),...] | random:seed,eps,lambda");
  flags.add(app, "--tol", "tol", "sup-norm residual tolerance");
}

fs::path prepare_out(const Config& cfg) {
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidParameter("cannot create output directory " + dir.string());
  return dir;
}

template <class Writer>
void write_artifact(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  io::write_file_atomic(path, out.str());
  std::cout << "wrote " << path.string() << '\n';
}

Polytope load_obj(const Config& cfg) {
  if (cfg.obj.empty()) throw InvalidParameter("--obj is required");
  std::ifstream in(cfg.obj);
  if (!in) throw InvalidParameter("cannot open " + cfg.obj);
  try {
    return polytope_from_obj(in);
  } catch (const InvalidParameter& e) {
    throw InvalidParameter(cfg.obj + ": " + e.what());
  }
}

void write_ellipsoid_csv(std::ostream& out, const Ellipsoid& e) {
  out << "axis,radius,ax,ay,az,cx,cy,cz\n";
  for (int k = 0; k < 3; ++k)
    out << k + 1 << ',' << io::format_double(e.radii[k]) << ',' << io::format_double(e.axes(0, k)) << ','
        << io::format_double(e.axes(1, k)) << ',' << io::format_double(e.axes(2, k)) << ','
        << io::format_double(e.center.x()) << ',' << io::format_double(e.center.y()) << ','
        << io::format_double(e.center.z()) << '\n';
}

int cmd_solve(const Config& cfg, bool write_body) {
  auto grid = build_grid(cfg.grid_L);
  DensityFunction f = make_density(cfg.f, grid);
  SolveOptions opt;
  opt.tolerance = cfg.tol;
  opt.max_iterations = cfg.max_iter;
  const fs::path dir = prepare_out(cfg);
  SolveOutcome o = newton_iterate(f, initial_guess(cfg.init, f, cfg.seed), opt);
  write_artifact(dir / "solve_report.csv", [&](std::ostream& s) { write_solve_report_csv(s, o.report); });
  if (!o.converged()) {
    std::cerr << "solve failed: " << o.message << " (residual " << io::format_double(o.report.final_residual) << " after "
              << o.report.iterations << " iterations)\n";
    return kFailed;
  }
  write_artifact(dir / "solution.csv", [&](std::ostream& s) { write_field_csv(s, o.h.field()); });
  if (write_body) write_artifact(dir / "body.obj", [&](std::ostream& s) { write_obj(s, polytope_from_support(o.h)); });
  std::cout << "f=" << cfg.f << " L=" << cfg.grid_L << " iterations=" << o.report.iterations
            << " residual=" << io::format_double(o.report.final_residual) << " min_h=" << io::format_double(o.h.min())
            << " max_h=" << io::format_double(o.h.field().sup_norm()) << '\n';
  return kOk;
}

int cmd_flow(const Config& cfg) {
  auto grid = build_grid(cfg.grid_L);
  DensityFunction f = make_density(cfg.f, grid);
  FlowOptions opt;
  opt.dt = cfg.dt;
  opt.t_end = cfg.t_end;
  opt.renormalize = cfg.renormalize;
  const fs::path dir = prepare_out(cfg);
  if (cfg.snapshot_every > 0) {
    opt.snapshot_every = cfg.snapshot_every;
    opt.snapshot = [&](long step, double, const SupportFunction& h) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%07ld.obj", step);
      write_artifact(dir / name, [&](std::ostream& s) { write_obj(s, polytope_from_support(h)); });
    };
  }
  FlowResult r = run_flow(f, initial_guess(cfg.init, f, cfg.seed), opt);
  write_artifact(dir / "trajectory.csv", [&](std::ostream& s) { write_trajectory_csv(s, r.trajectory); });
  write_artifact(dir / "flow_solution.csv", [&](std::ostream& s) { write_field_csv(s, r.h.field()); });
  std::cout << "steps=" << r.steps << " t=" << io::format_double(r.t) << " scale=" << io::format_double(r.scale)
            << " volume_drift=" << io::format_double(r.max_volume_drift);
  if (cfg.renormalize) std::cout << " residual=" << io::format_double(ma_residual(r.h, f).sup_norm());
  std::cout << '\n';
  return kOk;
}

int cmd_measure(const Config& cfg) {
  Polytope p = load_obj(cfg);
  const fs::path dir = prepare_out(cfg);
  DiscreteMeasure cone = cone_volume_measure(p);
  write_artifact(dir / "measure.csv", [&](std::ostream& s) { write_measure_csv(s, cone); });
  write_artifact(dir / "surface_area.csv", [&](std::ostream& s) { write_measure_csv(s, surface_area_measure(p)); });
  std::cout << "facets=" << p.facets().size() << " cone_volume_mass=" << io::format_double(cone.total_mass())
            << " volume=" << io::format_double(volume(p)) << '\n';
  return kOk;
}

int cmd_john(const Config& cfg) {
  Polytope p = load_obj(cfg);
  const fs::path dir = prepare_out(cfg);
  Ellipsoid e = enclosing_ellipsoid(p);
  write_artifact(dir / "ellipsoid.csv", [&](std::ostream& s) { write_ellipsoid_csv(s, e); });
  std::cout << "radii=" << io::format_double(e.radii[0]) << ',' << io::format_double(e.radii[1]) << ','
            << io::format_double(e.radii[2]) << '\n';
  return kOk;
}

int cmd_diag(const Config& cfg) {
  Polytope p = [&] {
    if (!cfg.obj.empty()) return load_obj(cfg);
    auto grid = build_grid(cfg.grid_L);
    DensityFunction f = make_density(cfg.f, grid);
    SolveOptions opt;
    opt.tolerance = cfg.tol;
    opt.max_iterations = cfg.max_iter;
    return polytope_from_support(newton_solve(f, initial_guess(cfg.init, f, cfg.seed), opt).h);
  }();
  const fs::path dir = prepare_out(cfg);
  BlowdownDiagnostics d = blowdown_diagnostics(p);
  const auto& r = d.ellipsoid.radii;
  write_artifact(dir / "diagnostics.csv", [&](std::ostream& s) {
    s << "r1,r2,r3,ratio_32,ratio_21,axis_dist_ratio,plane_dist_ratio\n";
    s << io::format_double(r[0]) << ',' << io::format_double(r[1]) << ',' << io::format_double(r[2]) << ','
      << io::format_double(d.ratio_32) << ',' << io::format_double(d.ratio_21) << ',' << io::format_double(d.axis_dist_ratio)
      << ',' << io::format_double(d.plane_dist_ratio) << '\n';
  });
  std::cout << "ratio_32=" << io::format_double(d.ratio_32) << " ratio_21=" << io::format_double(d.ratio_21)
            << " axis_dist_ratio=" << io::format_double(d.axis_dist_ratio)
            << " plane_dist_ratio=" << io::format_double(d.plane_dist_ratio) << '\n';
  return kOk;
}

int cmd_experiment(const Config& cfg) {
  ExperimentSpec spec = cfg.experiment_spec();
  const fs::path dir = prepare_out(cfg);
  std::cout << "running " << describe(spec) << '\n';
  ExperimentReport r = run_experiment(spec);
  write_artifact(dir / ("experiment_" + to_string(spec.kind) + ".csv"), [&](std::ostream& s) { s << report_csv(r); });
  SuiteVerdict v = judge(r);
  std::cout << (v.passed ? "PASS " : "FAIL ") << v.summary << '\n';
  return v.passed ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logarithmic Minkowski problem toolkit"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  FlagSet solve_flags, flow_flags, measure_flags, john_flags, diag_flags, exp_flags;
  bool write_body = false;

  auto* solve = app.add_subcommand("solve", "damped Newton solve of h det(Hess h + h I) = f");
  add_common(solve, solve_flags);
  add_density(solve, solve_flags);
  solve_flags.add(solve, "--max-iter", "max_iter", "Newton iteration cap");
  solve_flags.add(solve, "--init", "init", "initial guess: const-0.7 | const-1.0 | const-1.4 | perturbed | flow-newton");
  solve_flags.add(solve, "--seed", "seed", "seed for the perturbed initial guess");
  solve->add_flag("--body-obj", write_body, "also write body.obj, the hull of the boundary points");

  auto* flow = app.add_subcommand("flow", "normalized Gauss curvature flow towards a self-similar solution");
  add_common(flow, flow_flags);
  add_density(flow, flow_flags);
  flow_flags.add(flow, "--dt", "dt", "initial time step");
  flow_flags.add(flow, "--t-end", "t_end", "final time (required with --renormalize false)");
  flow_flags.add(flow, "--renormalize", "renormalize", "volume-preserving normalization (true/false)");
  flow_flags.add(flow, "--snapshot-every", "snapshot_every", "write an OBJ snapshot every k steps (0 = never)");
  flow_flags.add(flow, "--init", "init", "initial body, as for solve");
  flow_flags.add(flow, "--seed", "seed", "seed for the perturbed initial body");

  auto* measure = app.add_subcommand("measure", "cone-volume and surface-area measures of an OBJ polytope");
  add_common(measure, measure_flags);
  measure_flags.add(measure, "--obj", "obj", "input OBJ; its convex hull is used");

  auto* john = app.add_subcommand("john", "minimum-volume enclosing ellipsoid of an OBJ polytope");
  add_common(john, john_flags);
  john_flags.add(john, "--obj", "obj", "input OBJ; its convex hull is used");

  auto* diag = app.add_subcommand("diag", "blow-down diagnostics of an OBJ polytope or of the solution for --f");
  add_common(diag, diag_flags);
  add_density(diag, diag_flags);
  diag_flags.add(diag, "--obj", "obj", "input OBJ (takes precedence over --f)");
  diag_flags.add(diag, "--max-iter", "max_iter", "Newton iteration cap");
  diag_flags.add(diag, "--init", "init", "initial guess, as for solve");
  diag_flags.add(diag, "--seed", "seed", "seed for the perturbed initial guess");

  auto* experiment = app.add_subcommand("experiment", "seeded property suite with a CSV report");
  add_common(experiment, exp_flags);
  exp_flags.add(experiment, "--tol", "tol", "Newton residual tolerance");
  exp_flags.add(experiment, "--kind", "kind", "uniqueness | bound | diagnostics");
  exp_flags.add(experiment, "--samples", "samples", "number of random densities");
  exp_flags.add(experiment, "--seed", "seed", "master seed");
  exp_flags.add(experiment, "--eps", "eps", "sup deviation of f from 1");
  exp_flags.add(experiment, "--lambda", "lambda", "density bounds 1/lambda < f < lambda");
  exp_flags.add(experiment, "--inits", "inits", "semicolon-separated init strategies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  Config cfg;
  try {
    if (*solve) cfg = solve_flags.resolve();
    if (*flow) cfg = flow_flags.resolve();
    if (*measure) cfg = measure_flags.resolve();
    if (*john) cfg = john_flags.resolve();
    if (*diag) cfg = diag_flags.resolve();
    if (*experiment) cfg = exp_flags.resolve();
    if (*flow && !cfg.renormalize && !(cfg.t_end > 0)) throw InvalidParameter("--renormalize false needs --t-end > 0");
    if ((*measure || *john) && cfg.obj.empty()) throw InvalidParameter("--obj is required");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*solve) return cmd_solve(cfg, write_body);
    if (*flow) return cmd_flow(cfg);
    if (*measure) return cmd_measure(cfg);
    if (*john) return cmd_john(cfg);
    if (*diag) return cmd_diag(cfg);
    return cmd_experiment(cfg);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kFailed;
  }
}
