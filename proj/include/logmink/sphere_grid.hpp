#pragma once

// Discretization of the unit sphere: Gauss-Legendre colatitudes x equispaced
// longitudes, real spherical-harmonic transforms, and pseudo-spectral derivatives.
//
// Node ordering is colatitude-major: node = ring * (2L) + lon, rings ordered by
// increasing colatitude theta, longitudes phi_k = k * pi / L.
//
// Derivatives act on the double-Fourier space of the grid: per longitude mode m,
// the colatitude profile is a polynomial in cos(theta) (m even) or sin(theta)
// times a polynomial (m odd), of degree L-1. This space has exactly one function
// per node, contains every harmonic of degree < L, and is closed under longitude
// shifts by multiples of pi/L.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "logmink/errors.hpp"
#include "logmink/io.hpp"

namespace logmink {

using Vec3 = Eigen::Vector3d;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

struct GaussRule {
  std::vector<double> nodes;    // descending in x = cos(theta)
  std::vector<double> weights;  // sum to 2
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline std::size_t tri(int l, int m) { return static_cast<std::size_t>(l) * (l + 1) / 2 + m; }

/// 4pi-orthonormal associated Legendre values (no Condon-Shortley phase) for
/// 0 <= m <= l < lmax, packed by tri(l, m).
inline void normalized_legendre(int lmax, double x, double s, std::vector<double>& out) {
  out.assign(tri(lmax, 0), 0.0);
  if (lmax <= 0) return;
  out[0] = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 0; m < lmax; ++m) {
    if (m > 0) out[tri(m, m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * out[tri(m - 1, m - 1)];
    if (m + 1 < lmax) out[tri(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * out[tri(m, m)];
    for (int l = m + 2; l < lmax; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                           (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
    }
  }
}

/// Real orthonormal harmonics Y_lm(theta, phi) for l < lmax, index l*l + l + m.
inline void real_harmonics(int lmax, double x, double s, double phi, std::span<double> out) {
  std::vector<double> p;
  normalized_legendre(lmax, x, s, p);
  const double root2 = std::numbers::sqrt2;
  for (int l = 0; l < lmax; ++l) {
    std::size_t centre = static_cast<std::size_t>(l) * l + l;
    out[centre] = p[tri(l, 0)];
    for (int m = 1; m <= l; ++m) {
      out[centre + m] = root2 * p[tri(l, m)] * std::cos(m * phi);
      out[centre - m] = root2 * p[tri(l, m)] * std::sin(m * phi);
    }
  }
}

}  // namespace detail

/// Real spherical-harmonic coefficients c_{l,m}, 0 <= l < bandwidth, |m| <= l,
/// in the 4pi-orthonormal real basis (Y_{l,m} ~ cos(m phi) for m > 0, sin(|m| phi)
/// for m < 0).
struct HarmonicCoeffs {
  int bandwidth = 0;
  Eigen::VectorXd values;

  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l) * l + l + m; }
  static std::size_t count(int bandwidth) { return static_cast<std::size_t>(bandwidth) * bandwidth; }

  static HarmonicCoeffs zero(int bandwidth) {
    return {bandwidth, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count(bandwidth)))};
  }

  double& operator()(int l, int m) { return values[static_cast<Eigen::Index>(index(l, m))]; }
  double operator()(int l, int m) const { return values[static_cast<Eigen::Index>(index(l, m))]; }

  bool operator==(const HarmonicCoeffs&) const = default;
};

/// Scale that turns the orthonormal Y_{l,m} into the unit-peak-normalized
/// (Schmidt) harmonic: Z_{1,0} = u.e3, Z_{1,1} = u.e1, Z_{1,-1} = u.e2.
inline double schmidt_factor(int l) { return std::sqrt(4.0 * std::numbers::pi / (2.0 * l + 1.0)); }

/// First and second coordinate derivatives of a nodal field.
struct Derivatives {
  Eigen::VectorXd t, p, tt, tp, pp;
};

/// Per-node coefficients of a second-order operator
///   identity*v + t*v_theta + p*v_phi + tt*v_theta_theta + tp*v_theta_phi + pp*v_phi_phi.
struct SecondOrderCoefficients {
  Eigen::VectorXd identity, t, p, tt, tp, pp;
};

class SphericalGrid {
 public:
  explicit SphericalGrid(int bandwidth) : bandwidth_(bandwidth) {
    if (bandwidth < 4) throw InvalidParameter("grid bandwidth must be >= 4, got " + std::to_string(bandwidth));
    const int rings = bandwidth, lons = 2 * bandwidth;
    const std::size_t n = static_cast<std::size_t>(rings) * lons;

    auto rule = detail::gauss_legendre(rings);
    cos_.resize(rings);
    sin_.resize(rings);
    theta_.resize(rings);
    for (int j = 0; j < rings; ++j) {
      cos_[j] = rule.nodes[j];
      sin_[j] = std::sqrt((1.0 - rule.nodes[j]) * (1.0 + rule.nodes[j]));
      theta_[j] = std::acos(rule.nodes[j]);
    }
    phi_.resize(lons);
    for (int k = 0; k < lons; ++k) phi_[k] = k * std::numbers::pi / bandwidth;

    weights_.resize(static_cast<Eigen::Index>(n));
    nodes_.resize(n);
    e_theta_.resize(n);
    e_phi_.resize(n);
    node_sin_.resize(static_cast<Eigen::Index>(n));
    node_cos_.resize(static_cast<Eigen::Index>(n));
    const double dphi = std::numbers::pi / bandwidth;
    for (int j = 0; j < rings; ++j) {
      for (int k = 0; k < lons; ++k) {
        std::size_t i = node_index(j, k);
        double c = cos_[j], s = sin_[j], cp = std::cos(phi_[k]), sp = std::sin(phi_[k]);
        weights_[static_cast<Eigen::Index>(i)] = rule.weights[j] * dphi;
        nodes_[i] = Vec3(s * cp, s * sp, c);
        e_theta_[i] = Vec3(c * cp, c * sp, -s);
        e_phi_[i] = Vec3(-sp, cp, 0.0);
        node_sin_[static_cast<Eigen::Index>(i)] = s;
        node_cos_[static_cast<Eigen::Index>(i)] = c;
      }
    }

    const auto ncoef = static_cast<Eigen::Index>(HarmonicCoeffs::count(bandwidth));
    basis_.resize(static_cast<Eigen::Index>(n), ncoef);
    std::vector<double> row(static_cast<std::size_t>(ncoef));
    for (std::size_t i = 0; i < n; ++i) {
      int j = ring_of(i), k = lon_of(i);
      detail::real_harmonics(bandwidth, cos_[j], sin_[j], phi_[k], row);
      for (Eigen::Index q = 0; q < ncoef; ++q) basis_(static_cast<Eigen::Index>(i), q) = row[q];
    }
    analysis_ = basis_.transpose() * weights_.asDiagonal();

    build_colatitude_operators(rule);
    build_longitude_operators();
  }

  int bandwidth() const noexcept { return bandwidth_; }
  int rings() const noexcept { return bandwidth_; }
  int longitudes() const noexcept { return 2 * bandwidth_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t coeff_count() const noexcept { return HarmonicCoeffs::count(bandwidth_); }

  std::size_t node_index(int ring, int lon) const noexcept {
    return static_cast<std::size_t>(ring) * longitudes() + lon;
  }
  int ring_of(std::size_t node) const noexcept { return static_cast<int>(node / longitudes()); }
  int lon_of(std::size_t node) const noexcept { return static_cast<int>(node % longitudes()); }

  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Vec3>& nodes() const noexcept { return nodes_; }
  const Vec3& e_theta(std::size_t i) const { return e_theta_[i]; }
  const Vec3& e_phi(std::size_t i) const { return e_phi_[i]; }
  double theta(std::size_t i) const { return theta_[ring_of(i)]; }
  double phi(std::size_t i) const { return phi_[lon_of(i)]; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const Eigen::VectorXd& node_sin() const noexcept { return node_sin_; }
  const Eigen::VectorXd& node_cos() const noexcept { return node_cos_; }

  /// Nodes x coefficients matrix of the real orthonormal harmonics.
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  /// Coefficients x nodes quadrature projection, basis^T * diag(weights).
  const Eigen::MatrixXd& analysis() const noexcept { return analysis_; }

  /// Exact derivatives of the double-Fourier interpolant of `v` at the nodes.
  Derivatives derivatives(const Eigen::VectorXd& v) const {
    check_size(v);
    const int rings = this->rings(), lons = longitudes(), half = bandwidth_;
    Eigen::Map<const RowMatrix> V(v.data(), rings, lons);
    RowMatrix shifted(rings, lons);
    shifted.leftCols(half) = V.rightCols(half);
    shifted.rightCols(half) = V.leftCols(half);
    RowMatrix even = 0.5 * (V + shifted);
    RowMatrix odd = 0.5 * (V - shifted);

    RowMatrix dt = theta_even_1_ * even + theta_odd_1_ * odd;
    RowMatrix dtt = theta_even_2_ * even + theta_odd_2_ * odd;
    RowMatrix dp = V * fourier_1_.transpose();
    RowMatrix dpp = V * fourier_2_.transpose();
    RowMatrix dtp = dt * fourier_1_.transpose();

    Derivatives d;
    auto flat = [&](const RowMatrix& m) {
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()));
    };
    d.t = flat(dt);
    d.tt = flat(dtt);
    d.p = flat(dp);
    d.pp = flat(dpp);
    d.tp = flat(dtp);
    return d;
  }

  /// Matrix-free application of a second-order operator.
  Eigen::VectorXd apply(const SecondOrderCoefficients& a, const Eigen::VectorXd& v) const {
    Derivatives d = derivatives(v);
    return a.identity.cwiseProduct(v) + a.t.cwiseProduct(d.t) + a.p.cwiseProduct(d.p) +
           a.tt.cwiseProduct(d.tt) + a.tp.cwiseProduct(d.tp) + a.pp.cwiseProduct(d.pp);
  }

  /// Dense nodal matrix of the same operator.
  Eigen::MatrixXd assemble(const SecondOrderCoefficients& a) const {
    const int rings = this->rings(), lons = longitudes(), half = bandwidth_;
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < rings; ++j) {
      for (int k = 0; k < lons; ++k) {
        const auto i = static_cast<Eigen::Index>(node_index(j, k));
        const int k_opp = (k + half) % lons;
        out(i, i) += a.identity[i];
        for (int j2 = 0; j2 < rings; ++j2) {
          const double e1 = theta_even_1_(j, j2), o1 = theta_odd_1_(j, j2);
          const double e2 = theta_even_2_(j, j2), o2 = theta_odd_2_(j, j2);
          out(i, static_cast<Eigen::Index>(node_index(j2, k))) += 0.5 * (a.t[i] * (e1 + o1) + a.tt[i] * (e2 + o2));
          out(i, static_cast<Eigen::Index>(node_index(j2, k_opp))) +=
              0.5 * (a.t[i] * (e1 - o1) + a.tt[i] * (e2 - o2));
          if (a.tp[i] != 0.0) {
            for (int k2 = 0; k2 < lons; ++k2) {
              out(i, static_cast<Eigen::Index>(node_index(j2, k2))) +=
                  a.tp[i] * (e1 * even_fourier_1_(k, k2) + o1 * odd_fourier_1_(k, k2));
            }
          }
        }
        for (int k2 = 0; k2 < lons; ++k2) {
          out(i, static_cast<Eigen::Index>(node_index(j, k2))) +=
              a.p[i] * fourier_1_(k, k2) + a.pp[i] * fourier_2_(k, k2);
        }
      }
    }
    return out;
  }

  void check_size(const Eigen::VectorXd& v) const {
    if (static_cast<std::size_t>(v.size()) != size())
      throw InvalidParameter("field has " + std::to_string(v.size()) + " values, grid has " +
                             std::to_string(size()) + " nodes");
  }

 private:
  void build_colatitude_operators(const detail::GaussRule& rule) {
    const int n = rings();
    // Barycentric weights of Gauss-Legendre nodes.
    std::vector<double> bw(n);
    for (int j = 0; j < n; ++j) bw[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - rule.nodes[j] * rule.nodes[j]) * rule.weights[j]);
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(n, n), dx2 = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        dx(i, j) = (bw[j] / bw[i]) / (rule.nodes[i] - rule.nodes[j]);
      }
      dx(i, i) = -dx.row(i).sum();
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        dx2(i, j) = 2.0 * dx(i, j) * (dx(i, i) - 1.0 / (rule.nodes[i] - rule.nodes[j]));
      }
      dx2(i, i) = -dx2.row(i).sum();
    }
    Eigen::VectorXd s(n), c(n);
    for (int j = 0; j < n; ++j) s[j] = sin_[j], c[j] = cos_[j];
    const Eigen::VectorXd s2 = s.array().square(), s3 = s.array().cube(), sc = s.cwiseProduct(c);
    const Eigen::VectorXd inv_s = s.cwiseInverse();

    // m even: a(theta) = p(cos theta).
    theta_even_1_ = -(s.asDiagonal() * dx);
    theta_even_2_ = s2.asDiagonal() * dx2;
    theta_even_2_ -= c.asDiagonal() * dx;
    // m odd: a(theta) = sin(theta) q(cos theta).
    Eigen::MatrixXd o1 = -(s2.asDiagonal() * dx);
    o1.diagonal() += c;
    theta_odd_1_ = o1 * inv_s.asDiagonal();
    Eigen::MatrixXd o2 = s3.asDiagonal() * dx2;
    o2 -= 3.0 * (sc.asDiagonal() * dx);
    o2.diagonal() -= s;
    theta_odd_2_ = o2 * inv_s.asDiagonal();
  }

  void build_longitude_operators() {
    const int m = longitudes(), half = bandwidth_;
    const double h = 2.0 * std::numbers::pi / m;
    fourier_1_.resize(m, m);
    fourier_2_.resize(m, m);
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < m; ++j) {
        if (k == j) {
          fourier_1_(k, j) = 0.0;
          fourier_2_(k, j) = 0.0;
        } else {
          double half_angle = (k - j) * h / 2.0;
          double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
          fourier_1_(k, j) = 0.5 * sign / std::tan(half_angle);
          fourier_2_(k, j) = -sign / (2.0 * std::sin(half_angle) * std::sin(half_angle));
        }
      }
      // Rows annihilate constants exactly.
      fourier_2_(k, k) = 0.0;
      fourier_2_(k, k) = -fourier_2_.row(k).sum();
    }
    even_fourier_1_.resize(m, m);
    odd_fourier_1_.resize(m, m);
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < m; ++j) {
        double shifted = fourier_1_((k + half) % m, j);
        even_fourier_1_(k, j) = 0.5 * (fourier_1_(k, j) + shifted);
        odd_fourier_1_(k, j) = 0.5 * (fourier_1_(k, j) - shifted);
      }
    }
  }

  int bandwidth_;
  std::vector<double> theta_, cos_, sin_, phi_;
  std::vector<Vec3> nodes_, e_theta_, e_phi_;
  Eigen::VectorXd weights_, node_sin_, node_cos_;
  Eigen::MatrixXd basis_, analysis_;
  Eigen::MatrixXd theta_even_1_, theta_even_2_, theta_odd_1_, theta_odd_2_;
  Eigen::MatrixXd fourier_1_, fourier_2_, even_fourier_1_, odd_fourier_1_;
};

using GridPtr = std::shared_ptr<const SphericalGrid>;

inline GridPtr build_grid(int bandwidth) { return std::make_shared<const SphericalGrid>(bandwidth); }

/// Real-valued samples of a function at the nodes of one grid.
class ScalarField {
 public:
  ScalarField(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidParameter("field without a grid");
    grid_->check_size(values_);
    if (!values_.allFinite()) throw InvalidParameter("field has non-finite values");
  }

  static ScalarField constant(const GridPtr& grid, double c) {
    return {grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid->size()), c)};
  }

  template <class Fn>
  static ScalarField from_function(const GridPtr& grid, Fn&& fn) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
    for (std::size_t i = 0; i < grid->size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(grid->node(i));
    return {grid, std::move(v)};
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }

  bool same_grid(const ScalarField& other) const {
    return grid_ == other.grid_ || grid_->bandwidth() == other.grid_->bandwidth();
  }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!a.same_grid(b)) throw InvalidParameter("fields live on different grids");
}

/// Quadrature sum of w_i * v_i; exact for band-limited integrands of degree <= 2L-1.
inline double integrate(const ScalarField& field) { return field.grid()->weights().dot(field.values()); }

inline HarmonicCoeffs analyze(const ScalarField& field) {
  const auto& g = *field.grid();
  return {g.bandwidth(), g.analysis() * field.values()};
}

inline ScalarField synthesize(const HarmonicCoeffs& coeffs, const GridPtr& grid) {
  if (coeffs.bandwidth != grid->bandwidth() ||
      static_cast<std::size_t>(coeffs.values.size()) != grid->coeff_count())
    throw InvalidParameter("coefficient bandwidth " + std::to_string(coeffs.bandwidth) +
                           " does not match grid bandwidth " + std::to_string(grid->bandwidth()));
  return {grid, grid->basis() * coeffs.values};
}

/// Orthogonal projection onto harmonics of degree < L.
inline ScalarField project_band_limited(const ScalarField& field) {
  return synthesize(analyze(field), field.grid());
}

/// Point evaluation of a harmonic expansion at a unit vector.
inline double evaluate(const HarmonicCoeffs& coeffs, const Vec3& u) {
  double s = std::hypot(u.x(), u.y());
  double c = u.z();
  double phi = std::atan2(u.y(), u.x());
  std::vector<double> row(HarmonicCoeffs::count(coeffs.bandwidth));
  detail::real_harmonics(coeffs.bandwidth, c, s, phi, row);
  return Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())).dot(coeffs.values);
}

/// Covariant Hessian in the per-node orthonormal frame (e_theta, e_phi).
struct FrameHessian {
  Eigen::VectorXd e11, e12, e22;

  Eigen::Matrix2d at(std::size_t i) const {
    auto k = static_cast<Eigen::Index>(i);
    Eigen::Matrix2d m;
    m << e11[k], e12[k], e12[k], e22[k];
    return m;
  }
  Eigen::VectorXd trace() const { return e11 + e22; }
};

/// Hessian components from coordinate derivatives with the Christoffel terms of
/// the round metric dtheta^2 + sin^2(theta) dphi^2.
inline FrameHessian frame_hessian(const SphericalGrid& g, const Derivatives& d) {
  const Eigen::VectorXd& s = g.node_sin();
  const Eigen::VectorXd cot = g.node_cos().cwiseQuotient(s);
  FrameHessian h;
  h.e11 = d.tt;
  h.e12 = (d.tp - cot.cwiseProduct(d.p)).cwiseQuotient(s);
  h.e22 = d.pp.cwiseQuotient(s.cwiseProduct(s)) + cot.cwiseProduct(d.t);
  return h;
}

inline FrameHessian covariant_hessian(const ScalarField& h) {
  const auto& g = *h.grid();
  return frame_hessian(g, g.derivatives(h.values()));
}

/// Tangent gradient as an ambient vector per node.
inline std::vector<Vec3> surface_gradient(const ScalarField& h) {
  const auto& g = *h.grid();
  Derivatives d = g.derivatives(h.values());
  std::vector<Vec3> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    out[i] = d.t[k] * g.e_theta(i) + (d.p[k] / g.node_sin()[k]) * g.e_phi(i);
  }
  return out;
}

/// Spectral Laplace-Beltrami: coefficients scaled by -l(l+1).
inline ScalarField laplace_beltrami(const ScalarField& h) {
  HarmonicCoeffs c = analyze(h);
  for (int l = 0; l < c.bandwidth; ++l)
    for (int m = -l; m <= l; ++m) c(l, m) *= -static_cast<double>(l) * (l + 1);
  return synthesize(c, h.grid());
}

/// CSV rows `theta,phi,value` in node order, with a header line.
inline void write_field_csv(std::ostream& out, const ScalarField& field) {
  const auto& g = *field.grid();
  out << "theta,phi,value\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    out << io::format_double(g.theta(i)) << ',' << io::format_double(g.phi(i)) << ','
        << io::format_double(field[i]) << '\n';
}

inline ScalarField read_field_csv(std::istream& in, const GridPtr& grid) {
  std::string line;
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid->size()));
  std::size_t count = 0;
  while (std::getline(in, line)) {
    line = io::trim(line);
    if (line.empty() || line[0] == '#' || line.rfind("theta", 0) == 0) continue;
    auto cells = io::split(line, ',');
    if (cells.size() != 3) throw InvalidParameter("field CSV row needs 3 columns: " + line);
    if (count >= grid->size()) throw InvalidParameter("field CSV has more rows than grid nodes");
    double theta = io::parse_double(cells[0]), phi = io::parse_double(cells[1]);
    if (std::abs(theta - grid->theta(count)) > 1e-9 || std::abs(phi - grid->phi(count)) > 1e-9)
      throw InvalidParameter("field CSV row " + std::to_string(count) + " does not match grid node");
    values[static_cast<Eigen::Index>(count++)] = io::parse_double(cells[2]);
  }
  if (count != grid->size()) throw InvalidParameter("field CSV has " + std::to_string(count) + " rows, grid needs " + std::to_string(grid->size()));
  return {grid, std::move(values)};
}

}  // namespace logmink
