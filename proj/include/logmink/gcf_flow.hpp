#pragma once

// Normalized anisotropic Gauss curvature flow in support-function form,
//   dh/dt = -f / det W + lambda(t) h,
// whose stationary points are, up to scale, the solutions of h det W = f.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "logmink/density.hpp"
#include "logmink/errors.hpp"
#include "logmink/io.hpp"
#include "logmink/ma_solver.hpp"
#include "logmink/support.hpp"

namespace logmink {

struct FlowOptions {
  double dt = 1e-3;
  int max_halvings = 20;
  double stationarity_tolerance = 1e-9;  // ||dh/dt||_inf / ||h||_inf
  long max_steps = 100000;
  bool renormalize = true;
  // Without renormalization the flow has no stationary points; it runs to t_end.
  double t_end = 0.0;
  int record_every = 10;
  // Called every `snapshot_every` accepted steps when both are set.
  int snapshot_every = 0;
  std::function<void(long, double, const SupportFunction&)> snapshot;

  void validate() const {
    if (!(dt > 0) || max_halvings < 0 || !(stationarity_tolerance > 0) || max_steps < 1 || record_every < 1 ||
        snapshot_every < 0)
      throw InvalidParameter("flow options must be positive");
    if (!renormalize && !(t_end > 0)) throw InvalidParameter("flow without renormalization needs t_end > 0");
  }
};

struct FlowRecord {
  double t = 0;
  double volume = 0;
  double residual_sup = 0;
  double min_h = 0;
};

struct FlowResult {
  SupportFunction h;           // rescaled to solve h det W = f when renormalizing
  double scale = 1;            // lambda at the end; h = lambda^(1/3) * stationary profile
  long steps = 0;
  double t = 0;
  double max_volume_drift = 0; // relative, before the closing rescale
  std::vector<FlowRecord> trajectory;
};

inline void write_trajectory_csv(std::ostream& out, const std::vector<FlowRecord>& rows) {
  out << "t,volume,residual_sup,min_h\n";
  for (const auto& r : rows)
    out << io::format_double(r.t) << ',' << io::format_double(r.volume) << ',' << io::format_double(r.residual_sup)
        << ',' << io::format_double(r.min_h) << '\n';
}

/// lambda = integral(f) / (3 V(h)); keeps V(h) constant to first order.
inline double flow_lambda(const SupportFunction& h, const DensityFunction& f) {
  return integrate(f.field()) / (3.0 * volume_from_support(h));
}

/// Right-hand side of the flow. With renormalization the velocity is projected
/// onto harmonics of degree < L and its degree-one part is multiplied by -3,
/// which damps the translation mode without moving stationary points.
inline Eigen::VectorXd flow_velocity(const SupportFunction& h, const DensityFunction& f, bool renormalize) {
  Eigen::VectorXd v = -f.values().cwiseQuotient(h.det_w());
  if (!renormalize) return v;
  v += flow_lambda(h, f) * h.values();
  HarmonicCoeffs c = analyze(ScalarField(h.grid(), v));
  for (int m = -1; m <= 1; ++m) c(1, m) *= -3.0;
  return synthesize(c, h.grid()).values();
}

struct FlowStep {
  SupportFunction h;
  double dt;
  Eigen::VectorXd velocity;
};

/// One explicit Euler step, halving dt until the new iterate is admissible.
/// With renormalization the result is rescaled to `target_volume` if given.
inline FlowStep flow_step(const SupportFunction& h, const DensityFunction& f, double dt, const FlowOptions& opt = {},
                          std::optional<double> target_volume = std::nullopt) {
  if (!h.field().same_grid(f.field())) throw InvalidParameter("h and f live on different grids");
  if (!(dt > 0)) throw InvalidParameter("time step must be positive");
  Eigen::VectorXd vel = flow_velocity(h, f, opt.renormalize);
  for (int k = 0; k <= opt.max_halvings; ++k, dt *= 0.5) {
    ScalarField next(h.grid(), h.values() + dt * vel);
    if (next.min() <= 0) continue;
    try {
      SupportFunction s(next);
      if (opt.renormalize && target_volume) {
        double ratio = std::cbrt(*target_volume / volume_from_support(s));
        s = SupportFunction(ScalarField(h.grid(), ratio * s.values()));
      }
      return {std::move(s), dt, std::move(vel)};
    } catch (const ConvexityError&) {
    }
  }
  throw StepFailure("flow step inadmissible after " + std::to_string(opt.max_halvings) + " halvings");
}

/// Runs the flow from h0. With renormalization it stops once the relative
/// velocity drops below the stationarity tolerance, then rescales by
/// lambda^(1/3) so that the result solves h det W = f. Without it, it stops at t_end.
inline FlowResult run_flow(const DensityFunction& f, const SupportFunction& h0, const FlowOptions& opt = {}) {
  opt.validate();
  if (!h0.field().same_grid(f.field())) throw InvalidParameter("initial guess and density live on different grids");
  SupportFunction h = opt.renormalize ? SupportFunction(project_band_limited(h0.field())) : h0;
  const double v0 = volume_from_support(h);

  FlowResult out{h, 1.0, 0, 0.0, 0.0, {}};
  auto record = [&](const SupportFunction& cur, double t) {
    double vol = volume_from_support(cur);
    double scale = opt.renormalize ? std::cbrt(flow_lambda(cur, f)) : 1.0;
    SupportFunction scaled = opt.renormalize ? SupportFunction(ScalarField(cur.grid(), scale * cur.values())) : cur;
    out.trajectory.push_back({t, vol, ma_residual(scaled, f).sup_norm(), cur.min()});
    out.max_volume_drift = std::max(out.max_volume_drift, std::abs(vol - v0) / v0);
  };
  record(h, 0.0);

  double t = 0, dt = opt.dt;
  for (long step = 1;; ++step) {
    if (step > opt.max_steps) {
      double res = ma_residual(SupportFunction(ScalarField(h.grid(), std::cbrt(flow_lambda(h, f)) * h.values())), f).sup_norm();
      throw ConvergenceFailure("flow not stationary within the step limit", res, static_cast<int>(opt.max_steps));
    }
    if (!opt.renormalize) dt = std::min(dt, opt.t_end - t);
    FlowStep s = flow_step(h, f, dt, opt, opt.renormalize ? std::optional<double>(v0) : std::nullopt);
    double rate = (s.h.values() - h.values()).cwiseAbs().maxCoeff() / (s.dt * h.values().cwiseAbs().maxCoeff());
    t += s.dt;
    dt = s.dt;
    h = std::move(s.h);
    bool done = opt.renormalize ? rate <= opt.stationarity_tolerance : t >= opt.t_end * (1 - 1e-14);
    if (step % opt.record_every == 0 || done) record(h, t);
    if (opt.snapshot && opt.snapshot_every > 0 && step % opt.snapshot_every == 0) opt.snapshot(step, t, h);
    if (done) {
      out.steps = step;
      break;
    }
  }
  out.t = t;
  if (opt.renormalize) {
    out.scale = flow_lambda(h, f);
    out.h = SupportFunction(ScalarField(h.grid(), std::cbrt(out.scale) * h.values()));
  } else {
    out.h = h;
  }
  return out;
}

}  // namespace logmink
