#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "logmink/errors.hpp"
#include "logmink/sphere_grid.hpp"

namespace logmink {

/// Positive right-hand side f, kept both as harmonic coefficients and as nodal
/// values. Bounds are the nodal min and max unless tighter ones are imposed.
class DensityFunction {
 public:
  DensityFunction(const HarmonicCoeffs& coeffs, const GridPtr& grid)
      : coeffs_(coeffs), values_(synthesize(coeffs, grid)) {
    init_bounds();
  }

  /// Nodal values as given; coefficients are their projection.
  explicit DensityFunction(ScalarField values) : coeffs_(analyze(values)), values_(std::move(values)) { init_bounds(); }

  static DensityFunction constant(const GridPtr& grid, double c) {
    HarmonicCoeffs k = HarmonicCoeffs::zero(grid->bandwidth());
    k(0, 0) = c * std::sqrt(4.0 * std::numbers::pi);
    return {k, grid};
  }

  /// Check that lo <= f <= hi at every node and record (lo, hi) as the bounds.
  DensityFunction with_bounds(double lo, double hi) const {
    if (!(lo > 0) || !(hi >= lo)) throw InvalidParameter("density bounds need 0 < lo <= hi");
    if (values_.min() < lo || values_.max() > hi)
      throw InvalidParameter("density leaves the requested bounds");
    DensityFunction out = *this;
    out.lo_ = lo;
    out.hi_ = hi;
    return out;
  }

  const HarmonicCoeffs& coeffs() const noexcept { return coeffs_; }
  const ScalarField& field() const noexcept { return values_; }
  const Eigen::VectorXd& values() const noexcept { return values_.values(); }
  const GridPtr& grid() const noexcept { return values_.grid(); }
  double lower_bound() const noexcept { return lo_; }
  double upper_bound() const noexcept { return hi_; }
  double mean() const { return integrate(values_) / (4.0 * std::numbers::pi); }

  /// ||f - 1||_inf + max |f(u) - f(v)| / d(u, v)^(1/2) over node pairs with
  /// geodesic distance d <= pi / L.
  double holder_proxy() const {
    const auto& g = *grid();
    const double reach = std::numbers::pi / g.bandwidth();
    const double min_dot = std::cos(reach);
    const Eigen::VectorXd& v = values();
    double semi = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        double c = g.node(i).dot(g.node(j));
        if (c < min_dot) continue;
        double d = std::atan2(g.node(i).cross(g.node(j)).norm(), c);
        if (d <= 0) continue;
        semi = std::max(semi, std::abs(v[static_cast<Eigen::Index>(i)] - v[static_cast<Eigen::Index>(j)]) / std::sqrt(d));
      }
    return (v.array() - 1.0).abs().maxCoeff() + semi;
  }

 private:
  void init_bounds() {
    lo_ = values_.min();
    hi_ = values_.max();
    if (!(lo_ > 0)) throw InvalidParameter("density must be positive at every node");
  }

  HarmonicCoeffs coeffs_;
  ScalarField values_;
  double lo_ = 1, hi_ = 1;
};

}  // namespace logmink
