#include <gtest/gtest.h>

#include <random>

#include "logmink/ellipsoid.hpp"

using namespace logmink;

namespace {

Polytope box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i)
    pts.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  return convex_hull_3d(pts);
}

std::vector<Vec3> icosahedron() {
  const double g = (1 + std::sqrt(5.0)) / 2;
  std::vector<Vec3> pts;
  for (int s1 : {-1, 1})
    for (int s2 : {-1, 1}) {
      pts.emplace_back(0, s1, s2 * g);
      pts.emplace_back(s1, s2 * g, 0);
      pts.emplace_back(s2 * g, 0, s1);
    }
  for (auto& p : pts) p.normalize();
  return pts;
}

void expect_well_formed(const Ellipsoid& e) {
  EXPECT_LT((e.axes.transpose() * e.axes - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(e.radii[0], e.radii[1]);
  EXPECT_LE(e.radii[1], e.radii[2]);
  EXPECT_GT(e.radii[0], 0.0);
}

}  // namespace

TEST(Ellipsoid, BoxRadiiClosedForm) {
  const double a = 0.5, b = 2.0, c = 1.25;
  auto e = enclosing_ellipsoid(box(Vec3(-a, -b, -c), Vec3(a, b, c)));
  expect_well_formed(e);
  EXPECT_NEAR(e.radii[0], a * std::sqrt(3.0), 1e-5);
  EXPECT_NEAR(e.radii[1], c * std::sqrt(3.0), 1e-5);
  EXPECT_NEAR(e.radii[2], b * std::sqrt(3.0), 1e-5);
  EXPECT_LT(e.center.norm(), 1e-9);
  EXPECT_NEAR(std::abs(e.axes.col(2).y()), 1.0, 1e-9);
}

TEST(Ellipsoid, BallFromSymmetricPoints) {
  auto e = minimum_volume_ellipsoid(icosahedron());
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(e.radii[k], 1.0, 1e-5);
  auto f = enclosing_ellipsoid(convex_hull_3d(fibonacci_sphere(400)));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(f.radii[k], 1.0, 1e-5);
  EXPECT_LT(f.center.norm(), 1e-5);
}

TEST(Ellipsoid, RejectsDegeneratePoints) {
  std::vector<Vec3> flat;
  for (int i = 0; i < 8; ++i) flat.emplace_back(std::cos(i), std::sin(i), 0.0);
  EXPECT_THROW(minimum_volume_ellipsoid(flat), DimensionDeficient);
  EXPECT_THROW(minimum_volume_ellipsoid({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}), DimensionDeficient);
}

TEST(Ellipsoid, SandwichOnRandomHulls) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> pts;
    const Vec3 stretch(1.0 + 3 * std::abs(g(rng)), 1.0, 0.2 + std::abs(g(rng)));
    for (int i = 0; i < 4 + trial % 40; ++i) pts.push_back(Vec3(g(rng), g(rng), g(rng)).cwiseProduct(stretch));
    auto p = convex_hull_3d(pts);
    auto e = enclosing_ellipsoid(p);
    expect_well_formed(e);
    for (const auto& v : p.vertices()) EXPECT_LE(std::sqrt(e.gauge_squared(v)), 1.0 + 1e-6);
    EXPECT_TRUE(ellipsoid_inside(e.scaled(1.0 / 3.0), p, 1e-6)) << trial;
  }
}

TEST(Ellipsoid, SimplexShrinkIsInscribed) {
  // For a simplex the enclosing ellipsoid shrunk by 3 touches every facet.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 4; ++i) pts.emplace_back(g(rng), g(rng), g(rng));
    auto p = convex_hull_3d(pts);
    auto inner = enclosing_ellipsoid(p).scaled(1.0 / 3.0);
    for (const auto& f : p.facets()) EXPECT_NEAR(inner.support(f.normal), f.support, 1e-5 * (1 + std::abs(f.support)));
  }
}

TEST(Blowdown, CenteredBall) {
  auto d = blowdown_diagnostics(convex_hull_3d(fibonacci_sphere(400)));
  EXPECT_NEAR(d.ratio_32, 1.0, 1e-4);
  EXPECT_NEAR(d.ratio_21, 1.0, 1e-4);
  EXPECT_NEAR(d.axis_dist_ratio, 1.0, 1e-2);
  EXPECT_NEAR(d.plane_dist_ratio, 1.0, 1e-2);
  EXPECT_LE(d.axis_dist_ratio, 1.0 + 1e-9);
  EXPECT_LE(d.plane_dist_ratio, 1.0 + 1e-9);
}

TEST(Blowdown, ElongatedBox) {
  for (double m : {2.0, 5.0, 20.0}) {
    auto d = blowdown_diagnostics(box(Vec3(-1, -1, -m), Vec3(1, 1, m)));
    EXPECT_NEAR(d.ratio_32, m, 1e-5 * m);
    EXPECT_NEAR(d.ratio_21, 1.0, 1e-5);
    EXPECT_NEAR(d.axis_dist_ratio, 1 / std::sqrt(3.0), 1e-5);
    EXPECT_NEAR(d.plane_dist_ratio, 1 / (m * std::sqrt(3.0)), 1e-5);
  }
}

TEST(Blowdown, OriginOnFaceCenter) {
  // Second-longest axis is y; the origin sits on the y = 0 face.
  auto d = blowdown_diagnostics(box(Vec3(-1, 0, -3), Vec3(1, 4, 3)));
  EXPECT_NEAR(d.plane_dist_ratio, 0.0, 1e-12);
  EXPECT_NEAR(d.axis_dist_ratio, 1 / std::sqrt(3.0), 1e-5);
  EXPECT_NEAR(d.ratio_32, 1.5, 1e-5);
  EXPECT_NEAR(d.ratio_21, 2.0, 1e-5);
}

TEST(Blowdown, OriginOutsideRejected) {
  EXPECT_THROW(blowdown_diagnostics(box(Vec3(1, 1, 1), Vec3(2, 2, 2))), PreconditionViolation);
}
