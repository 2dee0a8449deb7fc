#pragma once

// The operator R(h) = h det(Hess h + h I), its linearization, and a damped
// Newton solver for R(h) = f on the nodal values of h.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <ostream>
#include <vector>

#include "logmink/density.hpp"
#include "logmink/errors.hpp"
#include "logmink/io.hpp"
#include "logmink/support.hpp"

namespace logmink {

/// h det W at every node.
inline Eigen::VectorXd ma_operator(const SupportFunction& h) { return h.values().cwiseProduct(h.det_w()); }

/// h det W - f at every node.
inline ScalarField ma_residual(const SupportFunction& h, const DensityFunction& f) {
  if (!h.field().same_grid(f.field())) throw InvalidParameter("h and f live on different grids");
  return {h.grid(), ma_operator(h) - f.values()};
}

/// Coefficients of phi -> det(W) phi + h cof(W) : (Hess phi + phi I) written as a
/// second-order operator in (theta, phi) coordinates.
inline SecondOrderCoefficients linearization_coefficients(const SupportFunction& h) {
  const auto& g = *h.grid();
  const Eigen::VectorXd& s = g.node_sin();
  const Eigen::VectorXd cot = g.node_cos().cwiseQuotient(s);
  const Eigen::VectorXd inv_s = s.cwiseInverse();
  const Eigen::VectorXd& hv = h.values();
  const FrameMatrix& w = h.w();
  const Eigen::VectorXd hw11 = hv.cwiseProduct(w.w11), hw22 = hv.cwiseProduct(w.w22), hw12 = hv.cwiseProduct(w.w12);
  SecondOrderCoefficients a;
  a.identity = h.det_w() + hw11 + hw22;
  a.tt = hw22;
  a.t = hw11.cwiseProduct(cot);
  a.pp = hw11.cwiseProduct(inv_s).cwiseProduct(inv_s);
  a.tp = -2.0 * hw12.cwiseProduct(inv_s);
  a.p = 2.0 * hw12.cwiseProduct(cot).cwiseProduct(inv_s);
  return a;
}

/// Directional derivative of h det W at h in the direction phi.
inline ScalarField linearized_operator(const SupportFunction& h, const ScalarField& phi) {
  if (!h.field().same_grid(phi)) throw InvalidParameter("h and phi live on different grids");
  return {h.grid(), h.grid()->apply(linearization_coefficients(h), phi.values())};
}

/// Dense Jacobian of the nodal map h -> h det W.
inline Eigen::MatrixXd ma_jacobian(const SupportFunction& h) {
  return h.grid()->assemble(linearization_coefficients(h));
}

struct SolveOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double backtrack = 0.5;
  double min_step = 1.0 / 1048576.0;  // 2^-20
  double positivity_floor = 1e-8;

  void validate() const {
    if (!(tolerance > 0) || max_iterations < 1 || !(backtrack > 0 && backtrack < 1) || !(min_step > 0 && min_step <= 1) ||
        !(positivity_floor > 0))
      throw InvalidParameter("solve options must be positive (backtrack and min step in (0, 1])");
  }
};

struct NewtonRecord {
  int iter = 0;
  double residual_sup = 0;
  double min_h = 0;
  double min_eig_w = 0;
  double step_size = 0;
};

struct SolveReport {
  std::vector<NewtonRecord> history;
  int iterations = 0;
  double final_residual = 0;
  double min_rcond = 1;  // smallest reciprocal condition estimate of the Newton systems
};

struct SolveResult {
  SupportFunction h;
  SolveReport report;
};

inline void write_solve_report_csv(std::ostream& out, const SolveReport& r) {
  out << "iter,residual_sup,min_h,min_eig_W,step_size\n";
  for (const auto& row : r.history)
    out << row.iter << ',' << io::format_double(row.residual_sup) << ',' << io::format_double(row.min_h) << ','
        << io::format_double(row.min_eig_w) << ',' << io::format_double(row.step_size) << '\n';
}

/// h0 = (mean f)^(1/3), exact for constant f.
inline SupportFunction default_initial_guess(const DensityFunction& f) {
  return SupportFunction::constant(f.grid(), std::cbrt(f.mean()));
}

namespace detail {

inline std::optional<SupportFunction> admissible(const ScalarField& h, double floor) {
  if (h.min() <= floor) return std::nullopt;
  try {
    return SupportFunction(h);
  } catch (const ConvexityError&) {
    return std::nullopt;
  }
}

}  // namespace detail

enum class SolveStatus { converged, iteration_limit, stalled, convexity_lost, singular };

/// Outcome of a Newton run that did not necessarily converge; `h` is the last
/// accepted iterate.
struct SolveOutcome {
  SupportFunction h;
  SolveReport report;
  SolveStatus status = SolveStatus::converged;
  std::string message;
  std::size_t bad_node = 0;
  double bad_value = 0;

  bool converged() const noexcept { return status == SolveStatus::converged; }
};

/// Damped Newton iteration on the nodal values. Each step is halved until the
/// trial iterate stays above the positivity floor, keeps W positive definite
/// and lowers the sup-norm residual. Never throws for solver failures.
inline SolveOutcome newton_iterate(const DensityFunction& f, const SupportFunction& h0, const SolveOptions& opt = {}) {
  opt.validate();
  if (!h0.field().same_grid(f.field())) throw InvalidParameter("initial guess and density live on different grids");

  SolveOutcome out{h0, {}, SolveStatus::converged, {}, 0, 0};
  if (h0.min() <= opt.positivity_floor) {
    out.status = SolveStatus::convexity_lost;
    out.message = "initial guess below the positivity floor";
    out.bad_value = h0.min();
    return out;
  }
  SupportFunction& h = out.h;
  SolveReport& report = out.report;
  Eigen::VectorXd r = ma_operator(h) - f.values();
  double res = r.cwiseAbs().maxCoeff();
  double last_step = 0;
  for (int it = 0;; ++it) {
    report.history.push_back({it, res, h.min(), h.min_eigenvalue().minCoeff(), last_step});
    report.iterations = it;
    report.final_residual = res;
    if (res <= opt.tolerance) return out;
    if (it == opt.max_iterations) {
      out.status = SolveStatus::iteration_limit;
      out.message = "Newton iteration did not converge";
      return out;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ma_jacobian(h));
    report.min_rcond = std::min(report.min_rcond, lu.rcond());
    const Eigen::VectorXd delta = lu.solve(-r);
    if (!delta.allFinite()) {
      out.status = SolveStatus::singular;
      out.message = "singular Newton system";
      return out;
    }

    bool any_admissible = false;
    bool accepted = false;
    for (double t = 1.0; t >= opt.min_step; t *= opt.backtrack) {
      auto trial = detail::admissible(ScalarField(h.grid(), h.values() + t * delta), opt.positivity_floor);
      if (!trial) continue;
      any_admissible = true;
      Eigen::VectorXd trial_r = ma_operator(*trial) - f.values();
      double trial_res = trial_r.cwiseAbs().maxCoeff();
      if (trial_res < res) {
        h = std::move(*trial);
        r = std::move(trial_r);
        res = trial_res;
        last_step = t;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_admissible) {
        ScalarField smallest(h.grid(), h.values() + opt.min_step * delta);
        auto cert = check_convexity(smallest);
        out.status = SolveStatus::convexity_lost;
        out.message = "no admissible damped Newton step";
        out.bad_node = cert.worst_node;
        out.bad_value = std::min(cert.worst_value, smallest.min());
      } else {
        out.status = SolveStatus::stalled;
        out.message = "damped Newton step failed to reduce the residual";
      }
      return out;
    }
  }
}

/// Throwing form of newton_iterate: convexity loss raises ConvexityError, any
/// other failure raises ConvergenceFailure carrying the last residual.
inline SolveResult newton_solve(const DensityFunction& f, const SupportFunction& h0, const SolveOptions& opt = {}) {
  SolveOutcome o = newton_iterate(f, h0, opt);
  if (o.status == SolveStatus::convexity_lost) throw ConvexityError(o.message, o.bad_node, o.bad_value);
  if (!o.converged()) throw ConvergenceFailure(o.message, o.report.final_residual, o.report.iterations);
  return {std::move(o.h), std::move(o.report)};
}

inline SolveResult newton_solve(const DensityFunction& f, const SolveOptions& opt = {}) {
  return newton_solve(f, default_initial_guess(f), opt);
}

}  // namespace logmink
