#include <gtest/gtest.h>

#include "logmink/config.hpp"

using namespace logmink;

TEST(DensityDescriptor, ConstantParsesAndEvaluates) {
  auto s = parse_density(" const:8 ");
  EXPECT_EQ(s.kind, DensitySpec::Kind::constant);
  EXPECT_EQ(s.value, 8.0);
  EXPECT_EQ(to_string(s), "const:8");
  auto f = make_density(s, build_grid(8));
  EXPECT_LT((f.values().array() - 8.0).abs().maxCoeff(), 1e-13);
  EXPECT_THROW(parse_density("const:-1"), InvalidParameter);
  EXPECT_THROW(parse_density("const:abc"), InvalidParameter);
}

TEST(DensityDescriptor, HarmonicsUseUnitPeakNormalization) {
  auto s = parse_density("harmonics:[(1,0,0.1), (1,1,-0.05),(2,0,0.02)]");
  ASSERT_EQ(s.terms.size(), 3u);
  EXPECT_EQ(s.terms[1], (HarmonicTerm{1, 1, -0.05}));
  EXPECT_EQ(to_string(s), "harmonics:[(1,0,0.1),(1,1,-0.05),(2,0,0.02)]");
  auto g = build_grid(8);
  auto f = make_density(s, g);
  auto exact = ScalarField::from_function(g, [](const Vec3& u) {
    return 1 + 0.1 * u.z() - 0.05 * u.x() + 0.02 * (1.5 * u.z() * u.z() - 0.5);
  });
  EXPECT_LT((f.values() - exact.values()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(to_string(parse_density("harmonics:[]")), "harmonics:[]");
}

TEST(DensityDescriptor, MalformedHarmonicsRejected) {
  for (const char* bad : {"harmonics:(1,0,0.1)", "harmonics:[(1,0)]", "harmonics:[(1,2,0.1)]", "harmonics:[(1,0,0.1),]",
                          "harmonics:[(1,0,0.1)(2,0,1)]", "harmonics:[(x,0,1)]"})
    EXPECT_THROW(parse_density(bad), InvalidParameter) << bad;
  EXPECT_THROW(make_density("harmonics:[(9,0,0.1)]", build_grid(8)), InvalidParameter);
  EXPECT_THROW(make_density("harmonics:[(1,0,2)]", build_grid(8)), InvalidParameter);
}

TEST(DensityDescriptor, RandomMatchesGenerator) {
  auto s = parse_density("random:42,0.05,2");
  EXPECT_EQ(to_string(s), "random:42,0.05,2");
  auto g = build_grid(12);
  EXPECT_EQ(make_density(s, g).values(), gen_density(42, 0.05, 2, g).values());
  EXPECT_THROW(parse_density("random:42,0.05"), InvalidParameter);
  EXPECT_THROW(parse_density("random:42,0.05,0.5"), InvalidParameter);
  EXPECT_THROW(parse_density("random:-1,0.05,2"), InvalidParameter);
  EXPECT_THROW(parse_density("sphere:1"), InvalidParameter);
  EXPECT_THROW(parse_density("1"), InvalidParameter);
}

TEST(ConfigFile, ParsesTypedFields) {
  auto c = parse_config("# run\n grid_L = 12\ntol=1e-9\n\nf = harmonics:[(1,0,0.1)]\nrenormalize = no\nkind = bound\n"
                        "samples = 5\ninits = const-0.7 ; perturbed\n");
  EXPECT_EQ(c.grid_L, 12);
  EXPECT_EQ(c.tol, 1e-9);
  EXPECT_EQ(c.f, "harmonics:[(1,0,0.1)]");
  EXPECT_FALSE(c.renormalize);
  auto spec = c.experiment_spec();
  EXPECT_EQ(spec.kind, SuiteKind::bound);
  EXPECT_EQ(spec.samples, 5);
  EXPECT_EQ(spec.eps, 0.45);
  EXPECT_EQ(spec.bandwidth, 12);
  EXPECT_EQ(spec.inits, (std::vector<std::string>{"const-0.7", "perturbed"}));
}

TEST(ConfigFile, RejectsBadInput) {
  for (const char* bad : {"unknown = 1\n", "grid_L = twelve\n", "grid_L = 2\n", "tol = -1\n", "grid_L\n",
                          "seed = 1\nseed = 2\n", "renormalize = maybe\n", "kind = other\n", "inits = const-1.0;x\n",
                          "f = const:0\n", "max_iter = 1.5\n"})
    EXPECT_THROW(parse_config(bad), InvalidParameter) << bad;
}

TEST(ConfigFile, NormalizedFormRoundTrips) {
  auto c = parse_config("seed=7\ntol = 1.0e-8\nf = const: 2.50\neps = 0.050\nobj = box.obj\nlambda=3\n");
  const std::string text = to_string(c);
  EXPECT_NE(text.find("f = const:2.5\n"), std::string::npos);
  EXPECT_NE(text.find("tol = 1e-08\n"), std::string::npos);
  auto again = parse_config(text);
  EXPECT_EQ(again, c);
  EXPECT_EQ(to_string(again), text);
  EXPECT_EQ(parse_config(to_string(Config{})), Config{});
}

TEST(ConfigFile, LaterValuesOverrideBase) {
  Config base = parse_config("grid_L = 12\n");
  base.set("grid_L", "20");
  EXPECT_EQ(base.grid_L, 20);
  EXPECT_THROW(base.set("grid-L", "20"), InvalidParameter);
}
