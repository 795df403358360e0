#include <gtest/gtest.h>

#include <cmath>

#include "rpstab/variation_decomposition.hpp"

using namespace rpstab;

namespace {

ConnectionData sphere(int dim, double c, int res) {
  ManifoldSpec s;
  s.kind = ManifoldKind::RoundSphere;
  s.dim = dim;
  s.curvature = c;
  s.resolution = res;
  return model_connection(build_manifold(s));
}

TensorField conformal(const ConnectionData& c, const TensorField& f) {
  auto h = compact(tensor(f, metric_field(c)));
  h.sym = Symmetry::Sym2;
  return h;
}

double rel_diff(const ConnectionData& c, const TensorField& a, const TensorField& b) {
  return l2_norm(c, add(a, b, 1.0, -1.0)) / l2_norm(c, b);
}

ConnectionData& s3() {
  static ConnectionData c = sphere(3, 1.0, 24);
  return c;
}

}  // namespace

TEST(Decomposition, GaugePlusConformalHasNoTTPart) {
  auto& c = s3();
  for (unsigned seed : {1u, 2u}) {
    auto h = add(div_star(c, bump_one_form(c, seed)), conformal(c, bump_scalar(c, seed + 10)));
    h.sym = Symmetry::Sym2;
    auto sp = tt_project(c, h, 1e-10);
    EXPECT_LT(l2_norm(c, sp.h_tt) / l2_norm(c, h), 1e-6) << seed;
    EXPECT_LT(sp.reassembly_error, 1e-10);
  }
}

TEST(Decomposition, BumpGaugeConditions) {
  auto& c = s3();
  for (unsigned seed : {3u, 4u}) {
    auto h = bump_sym2(c, seed);
    auto sp = tt_project(c, h, 1e-10);
    const double nh = l2_norm(c, sp.h_tt);
    ASSERT_GT(nh, 1e-3 * l2_norm(c, h));
    EXPECT_LT(l2_norm(c, div(c, sp.h_tt)) / nh, 1e-6) << seed;
    EXPECT_LT(l2_norm(c, trace(c, sp.h_tt)) / nh, 1e-6) << seed;
    EXPECT_LT(sp.reassembly_error, 1e-10);
    auto back = add(add(sp.h_tt, div_star(c, sp.omega)), conformal(c, sp.f));
    EXPECT_LT(rel_diff(c, back, h), 1e-10);
    EXPECT_FALSE(sp.residual_history.empty());
  }
}

TEST(Decomposition, ProjectionIsIdempotent) {
  auto& c = s3();
  auto first = tt_project(c, bump_sym2(c, 5), 1e-10).h_tt;
  auto second = tt_project(c, first, 1e-10).h_tt;
  EXPECT_LT(rel_diff(c, second, first), 1e-8);
}

TEST(Decomposition, FirstHarmonicHessian) {
  // D d f = -c f g for l = 1
  for (double k : {1.0, 2.0}) {
    auto c = sphere(3, k, 16);
    auto f = sphere_harmonic(c.manifold, 1, 0, 1);
    auto target = scale(conformal(c, f), -k);
    EXPECT_LT(rel_diff(c, hess(c, f), target), 1e-8) << k;
  }
}

TEST(Decomposition, HarmonicEigenvalues) {
  // l (l + n - 1) c
  for (int n : {3, 4}) {
    auto c = sphere(n, 1.5, n == 3 ? 16 : 12);
    for (int l : {1, 2}) {
      auto f = sphere_harmonic(c.manifold, l, 0, 2);
      const double mu = l * (l + n - 1) * 1.5;
      EXPECT_LT(rel_diff(c, laplace(c, f), scale(f, mu)), 1e-8) << n << " " << l;
    }
  }
}

TEST(Decomposition, GeneratorResiduals) {
  auto& c = s3();
  for (unsigned seed = 1; seed <= 2; ++seed) {
    auto s = tt_generator(c, seed);
    const double nh = l2_norm(c, s.h);
    ASSERT_GT(nh, 0.0);
    EXPECT_LT(l2_norm(c, div(c, s.h)) / nh, 1e-6);
    EXPECT_LT(l2_norm(c, trace(c, s.h)) / nh, 1e-8);
    EXPECT_GT(nh, 1e-6 * l2_norm(c, bump_sym2(c, s.seed_used)));
  }
}

TEST(Decomposition, BumpSupport) {
  auto& c = s3();
  auto f = bump(c, bump_scalar(c, 2), 0.5);
  EXPECT_LT(support_leak(f, 0.5), 1e-12);
}

namespace {
ConnectionData product(int res) {
  ManifoldSpec s;
  s.kind = ManifoldKind::ProductSphere;
  s.dim = 3;
  s.resolution = res;
  return model_connection(build_manifold(s));
}
}  // namespace

// traces go through the grid metric inverse, ill-conditioned near the chart poles
TEST(Decomposition, ProductConformalDifferenceSplitsCleanly) {
  auto c = product(12);
  auto M = c.manifold;
  auto f = compact(tensor(sphere_harmonic(M, 2, 0, 1, 0), sphere_harmonic(M, 1, 1, 2, 1)));
  auto h = compact(add(tensor(f, factor_metric_field(c, 0)), tensor(f, factor_metric_field(c, 1)), 1, -1));
  h.sym = Symmetry::Sym2;
  auto sp = product_split(c, h);
  const double nh = l2_norm(c, h);
  EXPECT_LT(l2_norm(c, sp.h1) / nh, 1e-7);
  EXPECT_LT(l2_norm(c, sp.h2) / nh, 1e-7);
  EXPECT_LT(l2_norm(c, sp.h_mixed) / nh, 1e-7);
  EXPECT_LT(rel_diff(c, sp.f, f), 1e-7);
  EXPECT_LT(rel_diff(c, product_assemble(c, sp), h), 1e-7);
}

TEST(Decomposition, ProductSampleRoundTrip) {
  auto c = product(12);
  for (unsigned seed : {1u, 2u}) {
    auto s = product_sample(c, seed);
    auto h = product_assemble(c, s);
    auto back = product_split(c, h);
    EXPECT_LT(rel_diff(c, back.h1, s.h1), 1e-7);
    EXPECT_LT(rel_diff(c, back.h2, s.h2), 1e-7);
    EXPECT_LT(rel_diff(c, back.h_mixed, s.h_mixed), 1e-7);
    EXPECT_LT(rel_diff(c, back.f, s.f), 1e-7);
    EXPECT_LT(rel_diff(c, product_assemble(c, back), h), 1e-7);
  }
}
