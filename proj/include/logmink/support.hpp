#pragma once

// Support functions sampled on a spherical grid, with the convexity certificate
// W = Hess h + h I and the body-level quantities derived from it.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "logmink/errors.hpp"
#include "logmink/polytope.hpp"
#include "logmink/sphere_grid.hpp"

namespace logmink {

/// Per-node entries of W = Hess h + h I in the (e_theta, e_phi) frame.
struct FrameMatrix {
  Eigen::VectorXd w11, w12, w22;

  Eigen::VectorXd determinant() const { return w11.cwiseProduct(w22) - w12.cwiseAbs2(); }

  Eigen::VectorXd min_eigenvalue() const {
    Eigen::VectorXd half_trace = 0.5 * (w11 + w22);
    Eigen::VectorXd radius = (0.25 * (w11 - w22).cwiseAbs2() + w12.cwiseAbs2()).cwiseSqrt();
    return half_trace - radius;
  }
};

inline FrameMatrix radii_of_curvature_matrix(const ScalarField& h) {
  FrameHessian hess = covariant_hessian(h);
  return {hess.e11 + h.values(), hess.e12, hess.e22 + h.values()};
}

struct ConvexityReport {
  Eigen::VectorXd min_eigenvalue;  // per node
  bool convex = false;
  std::size_t worst_node = 0;
  double worst_value = 0;
};

/// Smallest eigenvalue of W at every node; convex iff all are positive.
inline ConvexityReport check_convexity(const ScalarField& h) {
  ConvexityReport r;
  r.min_eigenvalue = radii_of_curvature_matrix(h).min_eigenvalue();
  Eigen::Index k = 0;
  r.worst_value = r.min_eigenvalue.minCoeff(&k);
  r.worst_node = static_cast<std::size_t>(k);
  r.convex = r.worst_value > 0;
  return r;
}

/// A sampled support function with h > 0 and W positive definite at every node.
class SupportFunction {
 public:
  explicit SupportFunction(ScalarField h) : field_(std::move(h)), w_(radii_of_curvature_matrix(field_)) {
    Eigen::Index k = 0;
    double hmin = field_.values().minCoeff(&k);
    if (!(hmin > 0))
      throw ConvexityError("support function must be positive", static_cast<std::size_t>(k), hmin);
    min_eig_ = w_.min_eigenvalue();
    double emin = min_eig_.minCoeff(&k);
    if (!(emin > 0))
      throw ConvexityError("Hess h + h I is not positive definite", static_cast<std::size_t>(k), emin);
  }

  static SupportFunction constant(const GridPtr& grid, double c) { return SupportFunction(ScalarField::constant(grid, c)); }

  const ScalarField& field() const noexcept { return field_; }
  const GridPtr& grid() const noexcept { return field_.grid(); }
  const Eigen::VectorXd& values() const noexcept { return field_.values(); }
  const FrameMatrix& w() const noexcept { return w_; }
  const Eigen::VectorXd& min_eigenvalue() const noexcept { return min_eig_; }
  Eigen::VectorXd det_w() const { return w_.determinant(); }
  double min() const { return field_.min(); }

 private:
  ScalarField field_;
  FrameMatrix w_;
  Eigen::VectorXd min_eig_;
};

/// V = (1/3) * integral of h det W.
inline double volume_from_support(const SupportFunction& h) {
  return integrate(ScalarField(h.grid(), h.values().cwiseProduct(h.det_w()))) / 3.0;
}

inline double volume_from_support(const ScalarField& h) { return volume_from_support(SupportFunction(h)); }

/// Grid approximation of max_u |h_K(u) - h_L(u)|.
inline double hausdorff_distance(const ScalarField& a, const ScalarField& b) {
  if (!a.same_grid(b)) throw InvalidParameter("Hausdorff distance needs both fields on the same grid");
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

inline double hausdorff_distance(const SupportFunction& a, const SupportFunction& b) {
  return hausdorff_distance(a.field(), b.field());
}

/// Support numbers of a polytope sampled at the grid nodes.
inline ScalarField sample_support(const Polytope& p, const GridPtr& grid) {
  return ScalarField::from_function(grid, [&](const Vec3& u) { return p.support(u); });
}

/// Boundary points x(u) = h(u) u + grad h(u), the inverse Gauss map.
inline std::vector<Vec3> boundary_points(const SupportFunction& h) {
  const auto& g = *h.grid();
  auto grad = surface_gradient(h.field());
  std::vector<Vec3> pts(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts[i] = h.field()[i] * g.node(i) + grad[i];
  return pts;
}

/// Inscribed polytope: hull of the boundary points at the grid nodes.
inline Polytope polytope_from_support(const SupportFunction& h) { return convex_hull_3d(boundary_points(h)); }

}  // namespace logmink
