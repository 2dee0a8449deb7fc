#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "logmink/experiments.hpp"

using namespace logmink;

namespace {

ExperimentSpec small_spec(SuiteKind kind) {
  ExperimentSpec s = ExperimentSpec::defaults(kind);
  s.samples = 2;
  s.bandwidth = 10;
  return s;
}

DensityFunction translated(const GridPtr& g, const Vec3& v) {
  return DensityFunction(ScalarField::from_function(g, [&](const Vec3& u) { return 1 + v.dot(u); }));
}

}  // namespace

TEST(GenDensity, ZeroEpsilonIsConstant) {
  auto f = gen_density(7, 0.0, 2.0, 12);
  EXPECT_EQ((f.values().array() - 1.0).abs().maxCoeff(), 0.0);
}

TEST(GenDensity, SupDeviationMatchesEpsilon) {
  for (std::uint64_t seed : {1u, 42u, 1234u}) {
    auto f = gen_density(seed, 0.05, 2.0, 16);
    EXPECT_NEAR((f.values().array() - 1.0).abs().maxCoeff(), 0.05, 1e-12) << seed;
    EXPECT_DOUBLE_EQ(f.lower_bound(), 0.5);
    EXPECT_DOUBLE_EQ(f.upper_bound(), 2.0);
    EXPECT_GT(f.holder_proxy(), 0.05);
  }
}

TEST(GenDensity, SeededCoefficientsAreBitIdentical) {
  auto a = gen_density(42, 0.05, 2.0, 16);
  auto b = gen_density(42, 0.05, 2.0, 16);
  ASSERT_EQ(a.coeffs().values.size(), b.coeffs().values.size());
  EXPECT_EQ(std::memcmp(a.coeffs().values.data(), b.coeffs().values.data(),
                        sizeof(double) * static_cast<std::size_t>(a.coeffs().values.size())),
            0);
  auto c = gen_density(43, 0.05, 2.0, 16);
  EXPECT_NE(a.coeffs(), c.coeffs());
}

TEST(GenDensity, LargeAmplitudeShrinksIntoBounds) {
  auto f = gen_density(5, 3.0, 2.0, 12);
  EXPECT_GT(f.values().minCoeff(), 0.5);
  EXPECT_LT(f.values().maxCoeff(), 2.0);
  EXPECT_THROW(gen_density(5, std::numeric_limits<double>::infinity(), 2.0, 12), GenerationFailure);
  EXPECT_THROW(gen_density(5, -0.1, 2.0, 12), InvalidParameter);
  EXPECT_THROW(gen_density(5, 0.1, 1.0, 12), InvalidParameter);
}

TEST(ExperimentSpec, Validation) {
  ExperimentSpec s;
  EXPECT_NO_THROW(s.validate());
  s.samples = 0;
  EXPECT_THROW(s.validate(), InvalidParameter);
  s = ExperimentSpec{};
  s.inits = {"const-1.0", "bogus"};
  EXPECT_THROW(s.validate(), InvalidParameter);
  s = ExperimentSpec{};
  s.lambda = 0.5;
  EXPECT_THROW(s.validate(), InvalidParameter);
  EXPECT_EQ(parse_suite_kind("bound"), SuiteKind::bound);
  EXPECT_THROW(parse_suite_kind("other"), InvalidParameter);
}

TEST(InitialGuess, EveryStrategyIsAdmissible) {
  auto g = build_grid(12);
  auto f = gen_density(11, 0.05, 2.0, g);
  for (const auto& name : all_init_strategies()) {
    SupportFunction h = initial_guess(name, f, 11);
    EXPECT_GT(h.min(), 0.0) << name;
    EXPECT_GT(h.min_eigenvalue().minCoeff(), 0.0) << name;
  }
  EXPECT_NEAR(initial_guess("const-8", DensityFunction::constant(g, 1.0), 0).min(), 2.0, 1e-14);
}

TEST(RunSample, ConstantDensityGivesZeroDistances) {
  auto spec = small_spec(SuiteKind::uniqueness);
  auto g = build_grid(spec.bandwidth);
  auto rec = run_sample(spec, 0, DensityFunction::constant(g, 1.0), "const:1", 1);
  EXPECT_EQ(rec.failures, 0) << rec.error;
  EXPECT_EQ(rec.solves, 5);
  EXPECT_LE(rec.max_pairwise_dist, 1e-8);
  EXPECT_NEAR(rec.h_sup, 1.0, 1e-10);
  EXPECT_NEAR(rec.ratio_32, 1.0, 0.05);
  EXPECT_NEAR(rec.ratio_21, 1.0, 0.05);
}

TEST(RunSample, TranslatedBallFromEveryInit) {
  auto spec = small_spec(SuiteKind::uniqueness);
  auto g = build_grid(12);
  const Vec3 v(0.03, -0.04, 0.1);
  auto f = translated(g, v);
  auto rec = run_sample(spec, 0, f, "translated", 3);
  EXPECT_EQ(rec.failures, 0) << rec.error;
  EXPECT_LE(rec.max_pairwise_dist, 1e-6);
  EXPECT_LE(rec.max_residual, spec.tolerance);
  EXPECT_LE(rec.volume_rel_err, 1e-8);
  // The common solution is the support function of the unit ball centred at v.
  auto h = newton_solve(f).h;
  ScalarField exact = ScalarField::from_function(g, [&](const Vec3& u) { return 1 + v.dot(u); });
  EXPECT_LE(hausdorff_distance(h.field(), exact), 1e-6);
  EXPECT_NEAR(rec.ratio_32, 1.0, 0.05);
  EXPECT_NEAR(rec.ratio_21, 1.0, 0.05);
  EXPECT_LT(rec.plane_dist_ratio, 1.0);
}

TEST(RunBound, ConstantExtremes) {
  auto spec = small_spec(SuiteKind::bound);
  auto g = build_grid(spec.bandwidth);
  const double lambda = spec.lambda;
  auto hi = run_sample(spec, 0, DensityFunction::constant(g, lambda), "const:2", 0);
  auto lo = run_sample(spec, 1, DensityFunction::constant(g, 1 / lambda), "const:0.5", 0);
  EXPECT_NEAR(hi.h_sup, std::cbrt(lambda), 1e-10);
  EXPECT_NEAR(lo.h_sup, std::cbrt(1 / lambda), 1e-10);
  EXPECT_NEAR(lo.min_h, std::cbrt(1 / lambda), 1e-10);
}

TEST(RunExperiment, AggregateMatchesRecords) {
  auto spec = small_spec(SuiteKind::bound);
  spec.samples = 3;
  auto r = run_bound(spec);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.aggregate, aggregate_records(r.records));
  double hmax = 0;
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.failures, 0) << rec.error;
    EXPECT_LE(rec.max_residual, spec.tolerance);
    hmax = std::max(hmax, rec.h_sup);
  }
  EXPECT_EQ(r.aggregate.max_h_sup, hmax);
  EXPECT_TRUE(judge(r).passed) << judge(r).summary;
}

TEST(RunExperiment, ReportBytesAreDeterministic) {
  auto spec = small_spec(SuiteKind::uniqueness);
  spec.inits = {"const-0.7", "perturbed"};
  auto a = report_csv(run_uniqueness(spec));
  auto b = report_csv(run_uniqueness(spec));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("# experiment kind=uniqueness", 0), 0u);
  EXPECT_NE(a.find("\nsample,descriptor,f_min,"), std::string::npos);
  spec.seed = 43;
  EXPECT_NE(report_csv(run_uniqueness(spec)), a);
}

TEST(RunExperiment, ZeroEpsilonUniquenessIsExact) {
  auto spec = small_spec(SuiteKind::uniqueness);
  spec.eps = 0;
  spec.samples = 1;
  spec.inits = {"const-0.7", "const-1.4", "perturbed"};
  auto r = run_uniqueness(spec);
  EXPECT_EQ(r.aggregate.failures, 0);
  EXPECT_LE(r.aggregate.max_pairwise_dist, 1e-8);
  EXPECT_TRUE(judge(r).passed);
}

TEST(Judge, FailsOnCapOrFailure) {
  ExperimentReport r;
  r.spec = ExperimentSpec::defaults(SuiteKind::diagnostics);
  SampleRecord rec;
  rec.max_residual = 1e-12;
  rec.ratio_32 = 3.5;
  rec.ratio_21 = 1.0;
  r.records = {rec};
  r.aggregate = aggregate_records(r.records);
  EXPECT_FALSE(judge(r).passed);
  r.records[0].ratio_32 = 2.0;
  r.aggregate = aggregate_records(r.records);
  EXPECT_TRUE(judge(r).passed);
  r.records[0].failures = 1;
  r.aggregate = aggregate_records(r.records);
  EXPECT_FALSE(judge(r).passed);
}
