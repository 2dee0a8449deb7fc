#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "logmink/ma_solver.hpp"
#include "test_support.hpp"

using namespace logmink;
using logmink::testing::random_coeffs;

namespace {

constexpr double kPi = std::numbers::pi;

SupportFunction translated_ball(const GridPtr& g, const Vec3& v, double r = 1.0) {
  return SupportFunction(ScalarField::from_function(g, [&](const Vec3& u) { return r + v.dot(u); }));
}

DensityFunction density_from(const GridPtr& g, const std::function<double(const Vec3&)>& fn) {
  return DensityFunction(ScalarField::from_function(g, fn));
}

// Random admissible support function: unit sphere plus small smooth harmonics.
SupportFunction random_body(const GridPtr& g, std::mt19937_64& rng, double amp) {
  HarmonicCoeffs c = random_coeffs(g->bandwidth(), 1, 5, amp, rng);
  c(0, 0) = std::sqrt(4 * kPi);
  return SupportFunction(synthesize(c, g));
}

}  // namespace

TEST(MaResidual, RoundSpheres) {
  auto g = build_grid(8);
  EXPECT_LT(ma_residual(SupportFunction::constant(g, 1.0), DensityFunction::constant(g, 1.0)).sup_norm(), 1e-12);
  for (double c : {0.5, 1.7, 3.0})
    EXPECT_LT(ma_residual(SupportFunction::constant(g, c), DensityFunction::constant(g, c * c * c)).sup_norm(), 1e-11 * c * c * c);
}

TEST(MaResidual, TranslatedBall) {
  auto g = build_grid(16);
  const Vec3 v = Vec3(0.3, -0.5, 0.2).normalized() * 0.1;
  auto h = translated_ball(g, v);
  auto f = density_from(g, [&](const Vec3& u) { return 1 + v.dot(u); });
  EXPECT_LT(ma_residual(h, f).sup_norm(), 1e-10);
}

TEST(MaResidual, GridMismatch) {
  EXPECT_THROW(ma_residual(SupportFunction::constant(build_grid(8), 1.0), DensityFunction::constant(build_grid(6), 1.0)),
               InvalidParameter);
}

TEST(Linearization, UnitSphereSpectrum) {
  const int L = 12;
  auto g = build_grid(L);
  auto one = SupportFunction::constant(g, 1.0);
  auto c = linearized_operator(one, ScalarField::constant(g, 2.0));
  EXPECT_LT((c.values().array() - 6.0).abs().maxCoeff(), 1e-10);
  for (int l = 1; l <= 5; ++l)
    for (int m = -l; m <= l; ++m) {
      HarmonicCoeffs k = HarmonicCoeffs::zero(L);
      k(l, m) = 1.0;
      auto y = synthesize(k, g);
      double eig = 3.0 - l * (l + 1.0);
      auto out = linearized_operator(one, y);
      EXPECT_LT((out.values() - eig * y.values()).cwiseAbs().maxCoeff(), 1e-9) << l << "," << m;
    }
}

TEST(Linearization, MatchesCentralDifferences) {
  const int L = 12;
  auto g = build_grid(L);
  std::mt19937_64 rng(41);
  const double t = 1e-5;
  for (int trial = 0; trial < 8; ++trial) {
    auto h = random_body(g, rng, 0.1);
    auto phi = synthesize(random_coeffs(L, 0, L - 1, 1.0, rng), g);
    SupportFunction hp(ScalarField(g, h.values() + t * phi.values()));
    SupportFunction hm(ScalarField(g, h.values() - t * phi.values()));
    Eigen::VectorXd fd = (ma_operator(hp) - ma_operator(hm)) / (2 * t);
    Eigen::VectorXd lin = linearized_operator(h, phi).values();
    EXPECT_LE((fd - lin).cwiseAbs().maxCoeff(), 1e-5 * (1 + phi.sup_norm()));
    // The assembled Jacobian is the same operator.
    EXPECT_LT((ma_jacobian(h) * phi.values() - lin).cwiseAbs().maxCoeff(), 1e-9 * (1 + lin.cwiseAbs().maxCoeff()));
  }
}

TEST(Newton, ConstantDensityFromLargerSphere) {
  auto g = build_grid(16);
  auto res = newton_solve(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, 1.3));
  EXPECT_LT((res.h.values().array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_LE(res.report.final_residual, 1e-10);
  EXPECT_GT(res.report.iterations, 0);
}

TEST(Newton, ScaledConstantDensity) {
  auto g = build_grid(16);
  auto res = newton_solve(DensityFunction::constant(g, 8.0), SupportFunction::constant(g, 1.0));
  EXPECT_LT((res.h.values().array() - 2.0).abs().maxCoeff(), 1e-8);
}

TEST(Newton, TranslatedBallRecovered) {
  auto g = build_grid(16);
  auto f = density_from(g, [](const Vec3& u) { return 1 + 0.1 * u.z(); });
  auto res = newton_solve(f, SupportFunction::constant(g, 1.0));
  auto exact = ScalarField::from_function(g, [](const Vec3& u) { return 1 + 0.1 * u.z(); });
  EXPECT_LT(hausdorff_distance(res.h.field(), exact), 1e-8);
  EXPECT_LE(ma_residual(res.h, f).sup_norm(), 1e-10);
}

TEST(Newton, RandomDensitiesResidualAndVolume) {
  auto g = build_grid(16);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 4; ++trial) {
    HarmonicCoeffs c = random_coeffs(16, 1, 4, 0.3, rng);
    c(0, 0) = std::sqrt(4 * kPi);
    DensityFunction f(c, g);
    auto res = newton_solve(f);
    // Re-check independently of the solver's bookkeeping.
    SupportFunction again(ScalarField(g, res.h.values()));
    EXPECT_LE(ma_residual(again, f).sup_norm(), 1e-10);
    EXPECT_NEAR(volume_from_support(again), integrate(f.field()) / 3, 1e-8);
    EXPECT_GT(res.report.min_rcond, 0.0);
  }
}

TEST(Newton, LongitudeRotationEquivariance) {
  const int L = 16;
  auto g = build_grid(L);
  std::mt19937_64 rng(5);
  HarmonicCoeffs c = random_coeffs(L, 1, 4, 0.3, rng);
  c(0, 0) = std::sqrt(4 * kPi);
  DensityFunction f(c, g);
  auto h0 = random_body(g, rng, 0.05);
  auto base = newton_solve(f, h0);
  for (int steps : {1, 5, L}) {
    DensityFunction fr(logmink::testing::rotate_longitude(f.field(), steps));
    SupportFunction h0r(logmink::testing::rotate_longitude(h0.field(), steps));
    auto rotated = newton_solve(fr, h0r);
    EXPECT_LT(hausdorff_distance(rotated.h.field(), logmink::testing::rotate_longitude(base.h.field(), steps)), 1e-8);
  }
}

TEST(Newton, IterationCapRaisesConvergenceFailure) {
  auto g = build_grid(8);
  SolveOptions opt;
  opt.max_iterations = 1;
  try {
    newton_solve(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, 3.0), opt);
    FAIL() << "expected convergence failure";
  } catch (const ConvergenceFailure& e) {
    EXPECT_EQ(e.iterations(), 1);
    EXPECT_GT(e.last_residual(), 1e-10);
  }
}

TEST(Newton, OptionsValidated) {
  auto g = build_grid(8);
  SolveOptions bad;
  bad.tolerance = 0;
  EXPECT_THROW(newton_solve(DensityFunction::constant(g, 1.0), bad), InvalidParameter);
  bad = {};
  bad.backtrack = 1.0;
  EXPECT_THROW(newton_solve(DensityFunction::constant(g, 1.0), bad), InvalidParameter);
}

TEST(Newton, ReportCsv) {
  auto g = build_grid(8);
  auto res = newton_solve(DensityFunction::constant(g, 2.0), SupportFunction::constant(g, 1.0));
  std::stringstream ss;
  write_solve_report_csv(ss, res.report);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "iter,residual_sup,min_h,min_eig_W,step_size");
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  EXPECT_EQ(rows, res.report.iterations + 1);
}
