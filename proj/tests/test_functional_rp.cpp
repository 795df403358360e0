#include <gtest/gtest.h>

#include <cmath>

#include "rpstab/functional_rp.hpp"
#include "rpstab/hessian_engine.hpp"
#include "rpstab/suites.hpp"
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

ConnectionData conn(const ManifoldSpec& s) { return model_connection(build_manifold(s)); }

const double kTwoPiSq = 2.0 * M_PI * M_PI;

}  // namespace

TEST(FunctionalRp, UnitSphereValues) {
  auto c = conn(spec(ManifoldKind::RoundSphere, 3, 1.0, 16));
  EXPECT_NEAR(rp_value(c, 2.0).value / (12.0 * kTwoPiSq), 1.0, 1e-10);
  EXPECT_NEAR(rp_value(c, 2.0).value, 236.8705056, 1e-6);
  EXPECT_NEAR(rp_value(c, 3.0).value / (std::pow(12.0, 1.5) * kTwoPiSq), 1.0, 1e-10);
  auto fv = rp_value(c, 2.5);
  EXPECT_NEAR(fv.absR_min, std::sqrt(12.0), 1e-8);
  EXPECT_NEAR(fv.absR_max, std::sqrt(12.0), 1e-8);
}

TEST(FunctionalRp, NormalizedValueIsScaleInvariant) {
  // metric lambda g has curvature c / lambda
  for (double p : {2.0, 3.0}) {
    const double base = tilde_rp(conn(spec(ManifoldKind::RoundSphere, 3, 1.0, 16)), p);
    for (double lambda : {0.5, 2.0}) {
      const double v = tilde_rp(conn(spec(ManifoldKind::RoundSphere, 3, 1.0 / lambda, 16)), p);
      EXPECT_NEAR(v / base, 1.0, 1e-10) << "p=" << p << " lambda=" << lambda;
    }
  }
}

TEST(FunctionalRp, RoundMetricsAreCritical) {
  struct Case {
    ManifoldSpec s;
    std::vector<double> ps;
  };
  std::vector<Case> cases = {{spec(ManifoldKind::RoundSphere, 3, 1.0, 24), {2.0, 2.5, 3.0}},
                             {spec(ManifoldKind::RoundSphere, 4, 1.0, 12), {2.0, 3.0, 4.0}},
                             {spec(ManifoldKind::ProductSphere, 3, 1.0, 16), {2.0, 3.0, 6.0}}};
  for (auto& cs : cases) {
    auto c = conn(unit_volume(cs.s));
    auto cp = curvature(c);
    const int n = c.dim();
    for (double p : cs.ps) {
      auto fv = rp_value(c, cp, p);
      auto grad = rp_gradient(c, cp, p);
      EXPECT_LT(l2_norm(c, grad.constrained) / fv.value, 1e-6) << "n=" << n << " p=" << p;
      const double tr = integrate(c, trace(c, grad.ambient));
      EXPECT_LT(std::abs(tr - (0.5 * n - p) * fv.value) / fv.value, 1e-6) << "trace identity n=" << n << " p=" << p;
    }
  }
}

TEST(FunctionalRp, ConstrainedGradientIsVolumeNeutral) {
  auto c = conn(spec(ManifoldKind::RoundSphere, 3, 1.0, 16));
  for (double p : {2.0, 3.0}) {
    auto grad = rp_gradient(c, p);
    EXPECT_LT(std::abs(integrate(c, trace(c, grad.constrained))) / rp_value(c, p).value, 1e-9);
  }
}

TEST(FunctionalRp, GradientMatchesFirstVariation) {
  auto c = conn(spec(ManifoldKind::RoundSphere, 3, 1.0, 24));
  for (double p : {2.0, 3.0}) {
    auto grad = rp_gradient(c, p);
    for (unsigned s : {1u, 2u}) {
      auto h = bump_sym2(c, s);
      auto fd = fd_derivative([&](double t) { return rp_along(c, h, t, p); }, 1, 1e-2, 2);
      const double an = l2_inner(c, grad.ambient, h);
      EXPECT_LT(std::abs(an - fd.value) / std::abs(fd.value), 1e-4) << "p=" << p << " seed " << s;
    }
  }
}

TEST(FunctionalRp, GradientMatchesFirstVariationAtNonCriticalBase) {
  // base g + 0.3 df (x) df is not critical, so every term of the gradient is exercised
  auto c0 = conn(spec(ManifoldKind::RoundSphere, 3, 1.0, 24));
  auto df = ext_d(c0, sphere_harmonic(c0.manifold, 1, 0, 1));
  auto k = tensor(df, df);
  k.sym = Symmetry::Sym2;
  auto c = perturbed_connection(c0, k, 0.3);
  auto Y = [&](int l, int a, int b) { return sphere_harmonic(c0.manifold, l, a, b); };
  // shares the base's symmetry axes; directions odd under them have zero first variation
  auto h = tensor(ext_d(c0, Y(2, 0, 1)), ext_d(c0, Y(2, 0, 2)));
  h = compact(add(add(h, permute(h, {1, 0})), tensor(Y(2, 0, 1), metric_field(c0))));
  h.sym = Symmetry::Sym2;
  for (double p : {2.0, 3.0}) {
    auto grad = rp_gradient(c, p);
    auto fd = fd_derivative([&](double t) { return rp_along(c, h, t, p); }, 1, 1e-2, 2);
    ASSERT_GT(std::abs(fd.value), 1.0);
    EXPECT_LT(std::abs(l2_inner(c, grad.ambient, h) - fd.value) / std::abs(fd.value), 1e-4) << "p=" << p;
  }
}

TEST(FunctionalRp, FiniteDifferenceHelper) {
  EXPECT_NEAR(fd_derivative([](double t) { return t * t; }, 2, 0.1, 1).value, 2.0, 1e-12);
  EXPECT_NEAR(fd_derivative([](double t) { return std::sin(t); }, 1, 0.1, 3).value, 1.0, 1e-10);
  EXPECT_NEAR(fd_derivative([](double t) { return std::exp(t); }, 2, 0.1, 3).value, 1.0, 1e-9);
  EXPECT_THROW(fd_derivative([](double t) { return t; }, 3, 0.1, 1), std::invalid_argument);
}

TEST(FunctionalRp, DiffeomorphismDirectionIsFlat) {
  // R_p along delta^* w at a critical metric
  auto c = conn(unit_volume(spec(ManifoldKind::RoundSphere, 3, 1.0, 24)));
  auto w = ext_d(c, sphere_harmonic(c.manifold, 2, 0, 1));
  auto h = div_star(c, w);
  const double Rp = rp_value(c, 2.0).value;
  auto fd = fd_derivative([&](double t) { return rp_along(c, h, t, 2.0); }, 1, 1e-2, 2);
  EXPECT_LT(std::abs(fd.value) / Rp, 1e-5);
}

TEST(FunctionalRp, SecondVariationAlongTT) {
  auto c = conn(unit_volume(spec(ManifoldKind::RoundSphere, 3, 1.0, 24)));
  calibrate_deltaD(c, 1);
  auto h = smooth_tt(c, 0);
  for (double p : {2.0, 3.0}) {
    auto fd = fd_derivative([&](double t) { return rp_along(c, h, t, p, true); }, 2, 2e-2, 2);
    auto gen = hessian_general(c, h, h, p);
    EXPECT_LT(std::abs(fd.value - gen.value) / std::abs(gen.value), 1e-3) << "general, p=" << p;
    auto cl = closed_tt(c, h, p);
    EXPECT_LT(std::abs(fd.value - cl.value) / std::abs(cl.value), 1e-3) << "closed TT form, p=" << p;
  }
}

TEST(FunctionalRp, RejectsSmallP) {
  auto c = conn(spec(ManifoldKind::RoundSphere, 3, 1.0, 8));
  EXPECT_THROW(rp_gradient(c, 1.5), std::invalid_argument);
}
