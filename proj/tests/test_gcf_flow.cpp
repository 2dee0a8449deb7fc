#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "logmink/gcf_flow.hpp"
#include "test_support.hpp"

using namespace logmink;

namespace {

constexpr double kPi = std::numbers::pi;

DensityFunction perturbed_density(const GridPtr& g, std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  HarmonicCoeffs c = logmink::testing::random_coeffs(g->bandwidth(), 1, 4, 1.0, rng);
  c.values *= eps / synthesize(c, g).sup_norm();
  c(0, 0) = std::sqrt(4 * kPi);
  return {c, g};
}

ScalarField translated(const GridPtr& g, double eps) {
  return ScalarField::from_function(g, [&](const Vec3& u) { return 1 + eps * u.z(); });
}

}  // namespace

TEST(FlowStep, UnitSphereIsStationary) {
  auto g = build_grid(8);
  auto one = SupportFunction::constant(g, 1.0);
  auto f = DensityFunction::constant(g, 1.0);
  EXPECT_NEAR(flow_lambda(one, f), 1.0, 1e-13);
  auto s = flow_step(one, f, 1e-3);
  EXPECT_LT((s.h.values().array() - 1.0).abs().maxCoeff(), 1e-13);
}

TEST(FlowStep, RoundShrinkingVelocity) {
  auto g = build_grid(8);
  FlowOptions opt;
  opt.renormalize = false;
  auto s = flow_step(SupportFunction::constant(g, 2.0), DensityFunction::constant(g, 1.0), 1e-3, opt);
  EXPECT_LT((s.velocity.array() + 0.25).abs().maxCoeff(), 1e-12);
  EXPECT_LT((s.h.values().array() - (2.0 - 0.25e-3)).abs().maxCoeff(), 1e-12);
}

TEST(FlowStep, TranslatedBallIsStationary) {
  auto g = build_grid(16);
  SupportFunction h(translated(g, 0.1));
  DensityFunction f(translated(g, 0.1));
  EXPECT_LT(flow_velocity(h, f, true).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FlowStep, FailsWhenNoHalvingIsAdmissible) {
  auto g = build_grid(8);
  FlowOptions opt;
  opt.renormalize = false;
  opt.t_end = 1;
  opt.max_halvings = 0;
  EXPECT_THROW(flow_step(SupportFunction::constant(g, 0.1), DensityFunction::constant(g, 1.0), 1.0, opt), StepFailure);
  opt.max_halvings = 20;
  auto s = flow_step(SupportFunction::constant(g, 0.1), DensityFunction::constant(g, 1.0), 1.0, opt);
  EXPECT_LT(s.dt, 1e-3);
}

TEST(RunFlow, ConstantDensityFromLargerSphere) {
  auto g = build_grid(12);
  auto r = run_flow(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, 1.5));
  EXPECT_LT((r.h.values().array() - 1.0).abs().maxCoeff(), 1e-7);
}

TEST(RunFlow, ScaledConstantDensity) {
  auto g = build_grid(12);
  auto r = run_flow(DensityFunction::constant(g, 8.0), SupportFunction::constant(g, 1.0));
  EXPECT_LT((r.h.values().array() - 2.0).abs().maxCoeff(), 1e-7);
  EXPECT_LE(ma_residual(r.h, DensityFunction::constant(g, 8.0)).sup_norm(), 1e-7);
}

TEST(RunFlow, TranslatedBallRecovered) {
  auto g = build_grid(16);
  DensityFunction f(translated(g, 0.1));
  auto r = run_flow(f, SupportFunction::constant(g, 1.0));
  EXPECT_LT(hausdorff_distance(r.h.field(), translated(g, 0.1)), 1e-6);
  EXPECT_LE(ma_residual(r.h, f).sup_norm(), 1e-7);
  EXPECT_LE(r.max_volume_drift, 1e-6);
}

TEST(RunFlow, AgreesWithNewton) {
  auto g = build_grid(16);
  for (std::uint64_t seed : {3u, 9u}) {
    auto f = perturbed_density(g, seed, 0.05);
    auto flow = run_flow(f, SupportFunction::constant(g, 1.0));
    auto newton = newton_solve(f);
    EXPECT_LT(hausdorff_distance(flow.h, newton.h), 1e-6) << seed;
    EXPECT_LE(ma_residual(flow.h, f).sup_norm(), 1e-7) << seed;
    EXPECT_LE(flow.max_volume_drift, 1e-6);
    for (const auto& row : flow.trajectory) EXPECT_GT(row.min_h, 0.0);
  }
}

TEST(RunFlow, ShrinkingLaw) {
  auto g = build_grid(8);
  FlowOptions opt;
  opt.renormalize = false;
  opt.dt = 1e-4;
  opt.t_end = 0.2;
  const double r0 = 1.0;
  auto r = run_flow(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, r0), opt);
  EXPECT_NEAR(r.t, 0.2, 1e-12);
  for (const auto& row : r.trajectory) {
    double exact = std::cbrt(r0 * r0 * r0 - 3 * row.t);
    EXPECT_NEAR(row.min_h, exact, 1e-3) << row.t;
    EXPECT_NEAR(row.volume, 4 * kPi / 3 * exact * exact * exact, 1e-2);
  }
}

TEST(RunFlow, StepLimitRaisesConvergenceFailure) {
  auto g = build_grid(8);
  FlowOptions opt;
  opt.max_steps = 5;
  EXPECT_THROW(run_flow(perturbed_density(g, 1, 0.05), SupportFunction::constant(g, 1.0), opt), ConvergenceFailure);
}

TEST(RunFlow, OptionsAndTrajectoryCsv) {
  auto g = build_grid(8);
  FlowOptions bad;
  bad.dt = -1;
  EXPECT_THROW(run_flow(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, 1.0), bad), InvalidParameter);
  FlowOptions off;
  off.renormalize = false;
  EXPECT_THROW(run_flow(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, 1.0), off), InvalidParameter);

  FlowOptions opt;
  int snapshots = 0;
  opt.snapshot_every = 2;
  opt.snapshot = [&](long, double, const SupportFunction&) { ++snapshots; };
  auto r = run_flow(DensityFunction::constant(g, 1.0), SupportFunction::constant(g, 1.2), opt);
  std::stringstream ss;
  write_trajectory_csv(ss, r.trajectory);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "t,volume,residual_sup,min_h");
  EXPECT_EQ(snapshots, static_cast<int>(r.steps / 2));
}
