#pragma once

// Seeded experiment suites over random densities: agreement of solutions from
// different starting points, size bounds, and anisotropy diagnostics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "logmink/density.hpp"
#include "logmink/ellipsoid.hpp"
#include "logmink/errors.hpp"
#include "logmink/gcf_flow.hpp"
#include "logmink/io.hpp"
#include "logmink/ma_solver.hpp"
#include "logmink/support.hpp"

namespace logmink {

enum class SuiteKind { uniqueness, bound, diagnostics };

inline std::string to_string(SuiteKind k) {
  switch (k) {
    case SuiteKind::uniqueness: return "uniqueness";
    case SuiteKind::bound: return "bound";
    case SuiteKind::diagnostics: return "diagnostics";
  }
  return "?";
}

inline SuiteKind parse_suite_kind(const std::string& s) {
  if (s == "uniqueness") return SuiteKind::uniqueness;
  if (s == "bound") return SuiteKind::bound;
  if (s == "diagnostics") return SuiteKind::diagnostics;
  throw InvalidParameter("unknown experiment kind '" + s + "' (uniqueness, bound, diagnostics)");
}

inline const std::vector<std::string>& all_init_strategies() {
  static const std::vector<std::string> names = {"const-0.7", "const-1.0", "const-1.4", "perturbed", "flow-newton"};
  return names;
}

struct ExperimentSpec {
  SuiteKind kind = SuiteKind::uniqueness;
  int samples = 20;
  std::uint64_t seed = 42;
  double eps = 0.05;
  double lambda = 2.0;
  int bandwidth = 16;
  std::vector<std::string> inits = all_init_strategies();
  double tolerance = 1e-10;
  double distance_cap = 1e-6;  // uniqueness
  double bound_cap = 10.0;     // bound
  double ratio_cap = 3.0;      // diagnostics

  void validate() const {
    if (!(eps >= 0) || !std::isfinite(eps)) throw InvalidParameter("eps must be finite and >= 0");
    if (!(lambda > 1)) throw InvalidParameter("lambda must exceed 1");
    if (samples < 1) throw InvalidParameter("sample count must be >= 1");
    if (bandwidth < 4) throw InvalidParameter("bandwidth must be >= 4");
    if (inits.empty()) throw InvalidParameter("at least one init strategy is required");
    for (const auto& name : inits)
      if (std::find(all_init_strategies().begin(), all_init_strategies().end(), name) == all_init_strategies().end())
        throw InvalidParameter("unknown init strategy '" + name + "'");
    if (!(tolerance > 0)) throw InvalidParameter("tolerance must be positive");
  }

  /// Defaults per suite: five inits for uniqueness, one for the others.
  static ExperimentSpec defaults(SuiteKind kind) {
    ExperimentSpec s;
    s.kind = kind;
    if (kind != SuiteKind::uniqueness) {
      s.samples = 50;
      s.eps = 0.45;
      s.inits = {"const-1.0"};
    }
    return s;
  }
};

namespace detail {

/// Uniform double in [-1, 1) from the top 53 bits, identical on every platform.
inline double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string random_descriptor(std::uint64_t seed, double eps, double lambda) {
  return "random:" + std::to_string(seed) + "," + io::format_double(eps) + "," + io::format_double(lambda);
}

/// f = 1 + a g / ||g||_inf with g a seeded combination of harmonics of degrees
/// 1..4 and a = eps. While 1/lambda < f < lambda fails, a shrinks by 0.9; after
/// 100 shrinks generation fails.
inline DensityFunction gen_density(std::uint64_t seed, double eps, double lambda, const GridPtr& grid) {
  if (!(eps >= 0)) throw InvalidParameter("eps must be >= 0");
  if (!(lambda > 1)) throw InvalidParameter("lambda must exceed 1");
  if (grid->bandwidth() < 5) throw InvalidParameter("random densities need bandwidth >= 5");
  std::mt19937_64 rng(seed);
  HarmonicCoeffs g = HarmonicCoeffs::zero(grid->bandwidth());
  for (int l = 1; l <= 4; ++l)
    for (int m = -l; m <= l; ++m) g(l, m) = detail::symmetric_unit(rng);
  const Eigen::VectorXd shape = synthesize(g, grid).values();
  const double norm = shape.cwiseAbs().maxCoeff();
  double amp = eps;
  for (int attempt = 0; attempt <= 100; ++attempt, amp *= 0.9) {
    Eigen::VectorXd v = (amp / norm) * shape;
    v.array() += 1.0;
    if (v.allFinite() && v.minCoeff() > 1.0 / lambda && v.maxCoeff() < lambda)
      return DensityFunction(ScalarField(grid, std::move(v))).with_bounds(1.0 / lambda, lambda);
  }
  throw GenerationFailure("random density could not meet the bounds after 100 retries");
}

inline DensityFunction gen_density(std::uint64_t seed, double eps, double lambda, int bandwidth) {
  return gen_density(seed, eps, lambda, build_grid(bandwidth));
}

struct SampleRecord {
  int index = 0;
  std::string descriptor;
  double f_min = 0, f_max = 0, holder_proxy = 0;
  int solves = 0;
  int failures = 0;
  std::string error;
  double max_pairwise_dist = std::numeric_limits<double>::quiet_NaN();
  double h_sup = std::numeric_limits<double>::quiet_NaN();
  double min_h = std::numeric_limits<double>::quiet_NaN();
  double max_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> iterations;
  double volume_rel_err = std::numeric_limits<double>::quiet_NaN();
  double ratio_32 = std::numeric_limits<double>::quiet_NaN();
  double ratio_21 = std::numeric_limits<double>::quiet_NaN();
  double axis_dist_ratio = std::numeric_limits<double>::quiet_NaN();
  double plane_dist_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentAggregate {
  int samples = 0;
  int failures = 0;
  double max_pairwise_dist = 0;
  double max_h_sup = 0;
  double min_min_h = std::numeric_limits<double>::infinity();
  double max_residual = 0;
  double max_volume_rel_err = 0;
  double max_ratio_32 = 0;
  double max_ratio_21 = 0;

  bool operator==(const ExperimentAggregate&) const = default;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<SampleRecord> records;
  ExperimentAggregate aggregate;
};

inline ExperimentAggregate aggregate_records(const std::vector<SampleRecord>& records) {
  ExperimentAggregate a;
  auto take_max = [](double& acc, double v) {
    if (!std::isnan(v)) acc = std::max(acc, v);
  };
  for (const auto& r : records) {
    ++a.samples;
    a.failures += r.failures;
    take_max(a.max_pairwise_dist, r.max_pairwise_dist);
    take_max(a.max_h_sup, r.h_sup);
    if (!std::isnan(r.min_h)) a.min_min_h = std::min(a.min_min_h, r.min_h);
    take_max(a.max_residual, r.max_residual);
    take_max(a.max_volume_rel_err, r.volume_rel_err);
    take_max(a.max_ratio_32, r.ratio_32);
    take_max(a.max_ratio_21, r.ratio_21);
  }
  return a;
}

/// Initial guess for one strategy. Constant strategies use (s * mean f)^(1/3);
/// "perturbed" adds seeded harmonics of degrees 1..4 to the mean-based constant,
/// shrinking them until admissible; "flow-newton" runs the flow first.
inline SupportFunction initial_guess(const std::string& strategy, const DensityFunction& f, std::uint64_t seed) {
  const double base = std::cbrt(f.mean());
  if (strategy.rfind("const-", 0) == 0) {
    double s = io::parse_double(strategy.substr(6));
    if (!(s > 0)) throw InvalidParameter("constant init scale must be positive");
    return SupportFunction::constant(f.grid(), std::cbrt(s) * base);
  }
  if (strategy == "perturbed") {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    HarmonicCoeffs c = HarmonicCoeffs::zero(f.grid()->bandwidth());
    for (int l = 1; l <= std::min(4, c.bandwidth - 1); ++l)
      for (int m = -l; m <= l; ++m) c(l, m) = detail::symmetric_unit(rng) / (1.0 + l);
    const ScalarField bump = synthesize(c, f.grid());
    const double scale = 0.1 * base / bump.sup_norm();
    for (double amp = 1.0; amp > 1e-3; amp *= 0.5) {
      auto h = detail::admissible(ScalarField(f.grid(), Eigen::VectorXd::Constant(bump.values().size(), base) +
                                                            amp * scale * bump.values()),
                                  0.0);
      if (h) return *h;
    }
    return SupportFunction::constant(f.grid(), base);
  }
  if (strategy == "flow-newton") {
    FlowOptions opt;
    opt.stationarity_tolerance = 1e-6;
    opt.record_every = 1000000;
    return run_flow(f, SupportFunction::constant(f.grid(), base), opt).h;
  }
  throw InvalidParameter("unknown init strategy '" + strategy + "'");
}

/// Solves f from every init strategy of the spec and fills one record.
inline SampleRecord run_sample(const ExperimentSpec& spec, int index, const DensityFunction& f, const std::string& descriptor,
                               std::uint64_t sample_seed) {
  SampleRecord rec;
  rec.index = index;
  rec.descriptor = descriptor;
  rec.f_min = f.values().minCoeff();
  rec.f_max = f.values().maxCoeff();
  rec.holder_proxy = f.holder_proxy();
  SolveOptions opt;
  opt.tolerance = spec.tolerance;
  const double target_volume = integrate(f.field()) / 3.0;

  std::vector<SupportFunction> solutions;
  std::vector<std::string> errors;
  for (const auto& strategy : spec.inits) {
    ++rec.solves;
    try {
      SolveOutcome o = newton_iterate(f, initial_guess(strategy, f, sample_seed), opt);
      rec.iterations.push_back(o.report.iterations);
      if (!o.converged()) {
        ++rec.failures;
        errors.push_back(strategy + ": " + o.message);
        continue;
      }
      solutions.push_back(o.h);
    } catch (const Error& e) {
      ++rec.failures;
      rec.iterations.push_back(-1);
      errors.push_back(strategy + ": " + e.what());
    }
  }
  rec.error = io::join(errors, "; ");
  if (solutions.empty()) return rec;

  rec.max_pairwise_dist = 0;
  rec.h_sup = 0;
  rec.min_h = std::numeric_limits<double>::infinity();
  rec.max_residual = 0;
  rec.volume_rel_err = 0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    // Re-validate from the stored values alone.
    SupportFunction h(ScalarField(f.grid(), solutions[i].values()));
    rec.h_sup = std::max(rec.h_sup, h.field().sup_norm());
    rec.min_h = std::min(rec.min_h, h.min());
    rec.max_residual = std::max(rec.max_residual, ma_residual(h, f).sup_norm());
    rec.volume_rel_err = std::max(rec.volume_rel_err, std::abs(volume_from_support(h) - target_volume) / target_volume);
    for (std::size_t j = i + 1; j < solutions.size(); ++j)
      rec.max_pairwise_dist = std::max(rec.max_pairwise_dist, hausdorff_distance(solutions[i], solutions[j]));
  }
  try {
    auto d = blowdown_diagnostics(polytope_from_support(solutions.front()));
    rec.ratio_32 = d.ratio_32;
    rec.ratio_21 = d.ratio_21;
    rec.axis_dist_ratio = d.axis_dist_ratio;
    rec.plane_dist_ratio = d.plane_dist_ratio;
  } catch (const Error& e) {
    rec.error += (rec.error.empty() ? "" : "; ") + std::string("diagnostics: ") + e.what();
  }
  return rec;
}

/// Per-sample density seeds, drawn in order from a generator seeded with spec.seed.
inline std::vector<std::uint64_t> sample_seeds(const ExperimentSpec& spec) {
  std::mt19937_64 master(spec.seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(spec.samples, 0)));
  for (auto& s : seeds) s = master();
  return seeds;
}

/// Runs every sample of the suite in index order.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  auto grid = build_grid(spec.bandwidth);
  ExperimentReport report{spec, {}, {}};
  const auto seeds = sample_seeds(spec);
  for (int i = 0; i < spec.samples; ++i) {
    const std::uint64_t sample_seed = seeds[static_cast<std::size_t>(i)];
    SampleRecord rec;
    try {
      DensityFunction f = gen_density(sample_seed, spec.eps, spec.lambda, grid);
      rec = run_sample(spec, i, f, random_descriptor(sample_seed, spec.eps, spec.lambda), sample_seed);
    } catch (const GenerationFailure& e) {
      rec.index = i;
      rec.descriptor = random_descriptor(sample_seed, spec.eps, spec.lambda);
      rec.failures = 1;
      rec.error = e.what();
    }
    report.records.push_back(std::move(rec));
  }
  report.aggregate = aggregate_records(report.records);
  return report;
}

inline ExperimentReport run_uniqueness(ExperimentSpec spec) {
  spec.kind = SuiteKind::uniqueness;
  return run_experiment(spec);
}

inline ExperimentReport run_bound(ExperimentSpec spec) {
  spec.kind = SuiteKind::bound;
  return run_experiment(spec);
}

inline ExperimentReport run_diagnostics(ExperimentSpec spec) {
  spec.kind = SuiteKind::diagnostics;
  return run_experiment(spec);
}

struct SuiteVerdict {
  bool passed = false;
  std::string summary;
};

/// The property each suite asserts on its aggregate.
inline SuiteVerdict judge(const ExperimentReport& r) {
  const auto& a = r.aggregate;
  std::ostringstream s;
  bool ok = a.failures == 0 && a.max_residual <= r.spec.tolerance;
  s << "failures=" << a.failures << " max_residual=" << io::format_double(a.max_residual);
  switch (r.spec.kind) {
    case SuiteKind::uniqueness:
      ok = ok && a.max_pairwise_dist <= r.spec.distance_cap;
      s << " max_pairwise_dist=" << io::format_double(a.max_pairwise_dist) << " cap=" << io::format_double(r.spec.distance_cap);
      break;
    case SuiteKind::bound:
      ok = ok && a.max_h_sup <= r.spec.bound_cap;
      s << " max_h_sup=" << io::format_double(a.max_h_sup) << " min_h=" << io::format_double(a.min_min_h)
        << " cap=" << io::format_double(r.spec.bound_cap);
      break;
    case SuiteKind::diagnostics:
      ok = ok && a.max_ratio_32 <= r.spec.ratio_cap && a.max_ratio_21 <= r.spec.ratio_cap;
      s << " max_ratio_32=" << io::format_double(a.max_ratio_32) << " max_ratio_21=" << io::format_double(a.max_ratio_21)
        << " cap=" << io::format_double(r.spec.ratio_cap);
      break;
  }
  return {ok, s.str()};
}

inline std::string describe(const ExperimentSpec& s) {
  std::ostringstream out;
  out << "kind=" << to_string(s.kind) << " samples=" << s.samples << " seed=" << s.seed << " eps=" << io::format_double(s.eps)
      << " lambda=" << io::format_double(s.lambda) << " L=" << s.bandwidth << " inits=" << io::join(s.inits, ";")
      << " tol=" << io::format_double(s.tolerance);
  return out.str();
}

/// CSV report: experiment echo line, header, one row per sample, aggregate lines.
inline std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# experiment " << describe(r.spec) << '\n';
  out << "sample,descriptor,f_min,f_max,holder_proxy,solves,failures,max_pairwise_dist,h_sup,min_h,max_residual,"
         "iterations,volume_rel_err,ratio_32,ratio_21,axis_dist_ratio,plane_dist_ratio,error\n";
  auto num = [](double v) { return io::format_double(v); };
  for (const auto& rec : r.records) {
    std::vector<std::string> its;
    for (int k : rec.iterations) its.push_back(std::to_string(k));
    out << rec.index << ',' << detail::csv_cell(rec.descriptor) << ',' << num(rec.f_min) << ',' << num(rec.f_max) << ','
        << num(rec.holder_proxy) << ',' << rec.solves << ',' << rec.failures << ',' << num(rec.max_pairwise_dist) << ','
        << num(rec.h_sup) << ',' << num(rec.min_h) << ',' << num(rec.max_residual) << ',' << io::join(its, ";") << ','
        << num(rec.volume_rel_err) << ',' << num(rec.ratio_32) << ',' << num(rec.ratio_21) << ','
        << num(rec.axis_dist_ratio) << ',' << num(rec.plane_dist_ratio) << ',' << detail::csv_cell(rec.error) << '\n';
  }
  const auto& a = r.aggregate;
  out << "# aggregate samples=" << a.samples << " failures=" << a.failures << '\n';
  out << "# aggregate max_pairwise_dist=" << num(a.max_pairwise_dist) << " max_h_sup=" << num(a.max_h_sup)
      << " min_h=" << num(a.min_min_h) << '\n';
  out << "# aggregate max_residual=" << num(a.max_residual) << " max_volume_rel_err=" << num(a.max_volume_rel_err) << '\n';
  out << "# aggregate max_ratio_32=" << num(a.max_ratio_32) << " max_ratio_21=" << num(a.max_ratio_21) << '\n';
  return out.str();
}

}  // namespace logmink
