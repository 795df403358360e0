#include <gtest/gtest.h>

#include <cmath>

#include "rpstab/tensor_calculus.hpp"
#include "rpstab/variation_decomposition.hpp"

using namespace rpstab;

namespace {

ManifoldSpec spec(ManifoldKind k, int dim, double c, int res) {
  ManifoldSpec s;
  s.kind = k;
  s.dim = dim;
  s.curvature = c;
  s.resolution = res;
  return s;
}

const double kTwoPiSq = 2.0 * M_PI * M_PI;

}  // namespace

TEST(ManifoldAtlas, KindNamesRoundTrip) {
  for (auto k : {ManifoldKind::RoundSphere, ManifoldKind::HyperbolicBall, ManifoldKind::ProductSphere,
                 ManifoldKind::BergerSphere})
    EXPECT_EQ(manifold_kind_from_string(to_string(k)), k);
  EXPECT_THROW(manifold_kind_from_string("Torus"), std::invalid_argument);
}

TEST(ManifoldAtlas, UnitThreeSphereVolume) {
  auto M = build_manifold(spec(ManifoldKind::RoundSphere, 3, 1.0, 24));
  EXPECT_NEAR(M->volume() / kTwoPiSq, 1.0, 1e-12);
  auto c = model_connection(M);
  EXPECT_NEAR(integrate(c, constant_scalar(M, 1.0)) / kTwoPiSq, 1.0, 1e-8);
}

TEST(ManifoldAtlas, SphereVolumeScalesWithCurvature) {
  // radius 1/sqrt(c): volume c^{-n/2} times the unit value
  for (int n : {3, 4}) {
    auto M = build_manifold(spec(ManifoldKind::RoundSphere, n, 4.0, n == 3 ? 16 : 12));
    const double unit = 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
    EXPECT_NEAR(integrate(model_connection(M), constant_scalar(M, 1.0)) / (unit * std::pow(4.0, -0.5 * n)), 1.0, 1e-8);
  }
}

TEST(ManifoldAtlas, UnitVolumeSpec) {
  for (auto k : {ManifoldKind::RoundSphere, ManifoldKind::ProductSphere}) {
    auto M = build_manifold(unit_volume(spec(k, 3, 1.0, 12)));
    EXPECT_NEAR(M->volume(), 1.0, 1e-12);
    EXPECT_NEAR(integrate(model_connection(M), constant_scalar(M, 1.0)), 1.0, 1e-8);
  }
}

TEST(ManifoldAtlas, PoincareMetricAtOrigin) {
  // odd Lobatto count puts a node at the origin
  auto M = build_manifold(spec(ManifoldKind::HyperbolicBall, 3, -1.0, 25));
  const Grid& G = *M->factors[0];
  std::size_t origin = G.nodes;
  for (std::size_t p = 0; p < G.nodes; ++p)
    if (G.dist_from_center(p) < 1e-14) origin = p;
  ASSERT_LT(origin, G.nodes);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(G.model_g[origin * 9 + i * 3 + j], i == j ? 4.0 : 0.0, 1e-14);
}

TEST(ManifoldAtlas, PoincareMetricMatchesClosedForm) {
  // 4 delta / (1 + c |x|^2)^2 with c = -1
  auto M = build_manifold(spec(ManifoldKind::HyperbolicBall, 3, -1.0, 16));
  const Grid& G = *M->factors[0];
  double worst = 0.0;
  for (std::size_t p = 0; p < G.nodes; ++p) {
    double r2 = 0.0;
    for (int k = 0; k < 3; ++k) r2 += G.coords[p * 3 + k] * G.coords[p * 3 + k];
    const double conf = 4.0 / ((1.0 - r2) * (1.0 - r2));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        worst = std::max(worst, std::abs(G.model_g[p * 9 + i * 3 + j] - (i == j ? conf : 0.0)) / conf);
  }
  EXPECT_LT(worst, 1e-14);
}

TEST(ManifoldAtlas, ProductMetricIsBlockDiagonal) {
  auto M = build_manifold(spec(ManifoldKind::ProductSphere, 3, 1.0, 8));
  auto g = metric_field(model_connection(M));
  double cross = 0.0, diag = 0.0;
  for (std::size_t a = 0; a < M->factors[0]->nodes; a += 37)
    for (std::size_t b = 0; b < M->factors[1]->nodes; b += 41)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          const double v = component(g, {i, j}, {a, b});
          if ((i < 3) != (j < 3))
            cross = std::max(cross, std::abs(v));
          else
            diag = std::max(diag, std::abs(v));
        }
  EXPECT_EQ(cross, 0.0);
  EXPECT_GT(diag, 0.0);
}

TEST(ManifoldAtlas, FirstHarmonicHasZeroMean) {
  auto M = build_manifold(spec(ManifoldKind::RoundSphere, 3, 1.0, 24));
  auto c = model_connection(M);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      EXPECT_LT(std::abs(integrate(c, sphere_harmonic(M, 1, a, b))), 1e-10);
    }
}

TEST(ManifoldAtlas, BallQuadratureConverges) {
  // oracle: the same integral at twice the resolution
  auto run = [](int res) {
    auto M = build_manifold(spec(ManifoldKind::HyperbolicBall, 3, -1.0, res));
    auto c = model_connection(M);
    auto f = bump_scalar(c, 5);
    return integrate(c, pointwise_inner(c, f, f));
  };
  const double coarse = run(40), fine = run(80);  // 40 is the default ball resolution
  EXPECT_GT(fine, 0.0);
  EXPECT_NEAR(coarse / fine, 1.0, 1e-8);
}

TEST(ManifoldAtlas, MetricSelfInnerProduct) {
  auto M = build_manifold(spec(ManifoldKind::RoundSphere, 3, 1.0, 16));
  auto c = model_connection(M);
  auto g = metric_field(c);
  EXPECT_NEAR(l2_inner(c, g, g) / (3.0 * kTwoPiSq), 1.0, 1e-8);
}

TEST(ManifoldAtlas, CurvatureNormOnUnitSphere) {
  // |R|^2 = 2 c^2 n (n - 1) = 12
  auto M = build_manifold(spec(ManifoldKind::RoundSphere, 3, 1.0, 16));
  auto c = model_connection(M);
  auto cp = curvature(c);
  for (double v : scalar_values(pointwise_inner(c, cp.R, cp.R))) ASSERT_NEAR(v, 12.0, 1e-8);
}

TEST(ManifoldAtlas, InnerProductPositiveDefinite) {
  auto M = build_manifold(spec(ManifoldKind::RoundSphere, 3, 1.0, 12));
  auto c = model_connection(M);
  for (unsigned s = 1; s <= 3; ++s) {
    auto T = bump_sym2(c, s);
    EXPECT_GT(l2_inner(c, T, T), 0.0);
  }
  auto z = zero_field(M, 2);
  EXPECT_EQ(l2_inner(c, z, z), 0.0);
}

TEST(ManifoldAtlas, RejectsBadSpecs) {
  EXPECT_ANY_THROW(build_manifold(spec(ManifoldKind::RoundSphere, 3, -1.0, 12)));
  EXPECT_ANY_THROW(build_manifold(spec(ManifoldKind::HyperbolicBall, 3, 1.0, 12)));
  EXPECT_ANY_THROW(build_manifold(spec(ManifoldKind::RoundSphere, 3, 1.0, 2)));
}
