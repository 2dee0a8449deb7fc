#pragma once

// Minimum-volume enclosing ellipsoids and the anisotropy diagnostics built on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "logmink/errors.hpp"
#include "logmink/polytope.hpp"

namespace logmink {

/// {x : (x - c)^T A (x - c) <= 1}, stored by principal axes. Column k of
/// `axes` is the unit axis belonging to radii[k], with radii ascending.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
  Vec3 radii = Vec3::Ones();

  Eigen::Matrix3d shape_matrix() const {
    return axes * radii.cwiseAbs2().cwiseInverse().asDiagonal() * axes.transpose();
  }

  /// Support function h_E(u) = u.c + |diag(r) axes^T u|.
  double support(const Vec3& u) const { return u.dot(center) + (radii.asDiagonal() * (axes.transpose() * u)).norm(); }

  /// Value of (x - c)^T A (x - c); at most 1 inside.
  double gauge_squared(const Vec3& x) const {
    Vec3 local = axes.transpose() * (x - center);
    return local.cwiseQuotient(radii).squaredNorm();
  }

  Ellipsoid scaled(double factor) const { return {center, axes, factor * radii}; }
};

struct KhachiyanOptions {
  double tolerance = 1e-7;
  int max_iterations = 100000;
};

/// Khachiyan's coordinate ascent on the barycentric weights of the points,
/// with Todd-Yildirim away steps. Stops once every lifted Mahalanobis value is
/// within (1 + tolerance) of d + 1. The result is then scaled so that every
/// point lies inside.
inline Ellipsoid minimum_volume_ellipsoid(const std::vector<Vec3>& points, const KhachiyanOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 4) throw DimensionDeficient("enclosing ellipsoid needs at least 4 points");
  constexpr double d = 3.0;
  Eigen::Matrix<double, 4, Eigen::Dynamic> q(4, n);
  for (Eigen::Index i = 0; i < n; ++i) q.col(i) << points[static_cast<std::size_t>(i)], 1.0;

  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::Matrix4d xinv;
  Eigen::VectorXd mahal(n);
  auto refresh = [&] {
    Eigen::Matrix4d x = q * u.asDiagonal() * q.transpose();
    Eigen::LDLT<Eigen::Matrix4d> ldlt(x);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-300))
      throw DimensionDeficient("points do not span R^3");
    xinv = ldlt.solve(Eigen::Matrix4d::Identity());
    mahal = (q.cwiseProduct(xinv * q)).colwise().sum().transpose();
  };
  refresh();
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::Index up = 0;
    double m_up = mahal.maxCoeff(&up);
    Eigen::Index down = -1;
    double m_down = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      if (u[i] > 0 && mahal[i] < m_down) m_down = mahal[i], down = i;
    if (m_up <= (d + 1.0) * (1.0 + opt.tolerance)) break;
    // u <- (1 - tau) u + tau e_j, with tau < 0 for an away step.
    Eigen::Index j = up;
    double tau = 0;
    if (m_up - (d + 1.0) >= (d + 1.0) - m_down) {
      tau = (m_up - d - 1.0) / ((d + 1.0) * (m_up - 1.0));
    } else {
      j = down;
      double beta = std::min((d + 1.0 - m_down) / ((d + 1.0) * (m_down - 1.0)), u[down] / (1.0 - u[down]));
      tau = -beta;
    }
    u *= 1.0 - tau;
    u[j] += tau;
    if (u[j] < 0) u[j] = 0;
    // Sherman-Morrison update of X^{-1} and of every Mahalanobis value.
    const double a = 1.0 - tau, r = tau / a;
    const Eigen::Vector4d w = xinv * q.col(j);
    const double denom = 1.0 + r * mahal[j];
    const Eigen::VectorXd g = q.transpose() * w;
    xinv = (xinv - (r / denom) * w * w.transpose()) / a;
    mahal = (mahal - (r / denom) * g.cwiseAbs2()) / a;
    if ((it + 1) % 1000 == 0) refresh();
  }

  Eigen::Matrix<double, 3, Eigen::Dynamic> p = q.topRows<3>();
  Vec3 c = p * u;
  Eigen::Matrix3d cov = p * u.asDiagonal() * p.transpose() - c * c.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0))
    throw DimensionDeficient("points do not span R^3");
  // A = cov^{-1} / d, so radii are sqrt(d * eigenvalues of cov).
  Ellipsoid e;
  e.center = c;
  e.axes = eig.eigenvectors();
  e.radii = (d * eig.eigenvalues()).cwiseSqrt();
  if (e.axes.determinant() < 0) e.axes.col(2) *= -1.0;
  double worst = 0;
  for (const auto& x : points) worst = std::max(worst, e.gauge_squared(x));
  e.radii *= std::sqrt(worst);
  return e;
}

/// Enclosing ellipsoid of a polytope's vertices.
inline Ellipsoid enclosing_ellipsoid(const Polytope& p, const KhachiyanOptions& opt = {}) {
  return minimum_volume_ellipsoid(p.vertices(), opt);
}

/// Whether the ellipsoid lies in the polytope, tested facet by facet through
/// support numbers with an absolute slack.
inline bool ellipsoid_inside(const Ellipsoid& e, const Polytope& p, double slack) {
  return std::all_of(p.facets().begin(), p.facets().end(),
                     [&](const Facet& f) { return e.support(f.normal) <= f.support + slack; });
}

struct BlowdownDiagnostics {
  double ratio_32 = 1;
  double ratio_21 = 1;
  double axis_dist_ratio = 0;
  double plane_dist_ratio = 0;
  Ellipsoid ellipsoid;
};

namespace detail {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
inline std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

/// Anisotropy of P relative to its enclosing ellipsoid, and how far the origin
/// sits from the boundary of P's shadows on the longest axis and on the plane
/// of the two longest axes.
inline BlowdownDiagnostics blowdown_diagnostics(const Polytope& p) {
  if (!p.contains_origin()) throw PreconditionViolation("blow-down diagnostics need the origin inside the polytope");
  BlowdownDiagnostics out;
  out.ellipsoid = enclosing_ellipsoid(p);
  const Vec3& r = out.ellipsoid.radii;
  out.ratio_32 = r[2] / r[1];
  out.ratio_21 = r[1] / r[0];
  const Vec3 e2 = out.ellipsoid.axes.col(1), e3 = out.ellipsoid.axes.col(2);

  out.axis_dist_ratio = std::max(0.0, std::min(p.support(e3), p.support(-e3))) / r[2];

  std::vector<detail::Vec2> shadow;
  for (const auto& v : p.vertices()) shadow.emplace_back(v.dot(e2), v.dot(e3));
  auto poly = detail::convex_hull_2d(std::move(shadow));
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const detail::Vec2& a = poly[k];
    const detail::Vec2& b = poly[(k + 1) % poly.size()];
    double len = (b - a).norm();
    if (len == 0) continue;
    dist = std::min(dist, detail::cross2(a, b, detail::Vec2::Zero()) / len);
  }
  out.plane_dist_ratio = std::max(0.0, dist) / r[2];
  return out;
}

}  // namespace logmink
