#include <gtest/gtest.h>

#include <cmath>

#include "rpstab/tensor_calculus.hpp"
#include "rpstab/variation_decomposition.hpp"
#include "rpstab/variation_ops.hpp"

using namespace rpstab;

namespace {

ConnectionData make(ManifoldKind k, int dim, double c, int res) {
  ManifoldSpec s;
  s.kind = k;
  s.dim = dim;
  s.curvature = c;
  s.resolution = res;
  return model_connection(build_manifold(s));
}

ConnectionData sphere(int res) { return make(ManifoldKind::RoundSphere, 3, 1.0, res); }
ConnectionData ball(int res = 40) { return make(ManifoldKind::HyperbolicBall, 3, -1.0, res); }

double rel_l2(const ConnectionData& c, const TensorField& a, const TensorField& b) {
  return l2_norm(c, add(a, b, 1.0, -1.0)) / std::max(l2_norm(c, a), l2_norm(c, b));
}

}  // namespace

TEST(TensorCalculus, ScalarCurvatureOfUnitSphere) {
  auto c = sphere(16);
  auto cp = curvature(c);
  for (double v : scalar_values(cp.scal)) ASSERT_NEAR(v, 6.0, 1e-8);
}

TEST(TensorCalculus, RcheckIsMultipleOfMetric) {
  // Rcheck = |R|^2 g / n = 4 g on the unit 3-sphere
  auto c = sphere(16);
  auto cp = curvature(c);
  auto g = metric_field(c);
  EXPECT_LT(l2_norm(c, add(cp.Rcheck, g, 1.0, -4.0)) / l2_norm(c, g), 1e-8);
}

TEST(TensorCalculus, BallSectionalCurvatureIsMinusOne) {
  auto c = ball();
  auto cp = curvature(c);
  const auto& R = cp.R.dense();
  const auto& g = metric_field(c).dense();
  const int m = 3;
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (std::size_t p = 0; p < R.nodes; ++p) {
        const double gii = g.comp(i * m + i)[p], gjj = g.comp(j * m + j)[p], gij = g.comp(i * m + j)[p];
        const double K = R.comp(((i * m + j) * m + i) * m + j)[p] / (gii * gjj - gij * gij);
        worst = std::max(worst, std::abs(K + 1.0));
      }
  EXPECT_LT(worst, 1e-8);
}

TEST(TensorCalculus, ClosedFormChristoffels) {
  EXPECT_LT(christoffel_closed_form_defect(sphere(16)), 1e-10);
  EXPECT_LT(christoffel_closed_form_defect(ball()), 1e-8);
}

TEST(TensorCalculus, MetricIsParallel) {
  for (auto c : {sphere(16), ball()}) {
    auto g = metric_field(c);
    EXPECT_LT(max_abs(cov_deriv(c, g)) / max_abs(g), 1e-8);
    EXPECT_LT(l2_norm(c, div(c, g)), 1e-8);
  }
}

TEST(TensorCalculus, LaplacianIsAdjoint) {
  // <df, df> = <f, Lap f> for compactly supported f
  // ball bumps are Gaussians, so a tiny boundary term survives there
  for (auto [c, tol] : {std::pair{sphere(32), 1e-8}, std::pair{ball(), 1e-6}}) {
    auto f = bump_scalar(c, 3);
    auto df = ext_d(c, f);
    const double lhs = l2_inner(c, df, df), rhs = l2_inner(c, f, laplace(c, f));
    EXPECT_NEAR(lhs / rhs, 1.0, tol);
  }
}

TEST(TensorCalculus, BochnerOnFirstHarmonic) {
  // Lap df = D*D df + (n-1) c df
  auto c = sphere(24);
  auto f = sphere_harmonic(c.manifold, 1, 0, 1);
  auto df = ext_d(c, f);
  auto lhs = ext_d(c, laplace(c, f));
  auto rhs = add(rough_laplacian(c, df), df, 1.0, 2.0);
  EXPECT_LT(rel_l2(c, lhs, rhs), 1e-6);
  EXPECT_LT(check_bochner(c, bump_scalar(c, 4)).rel_l2, 1e-6);
}

TEST(TensorCalculus, DeltaDdDIdentityOnSphere) {
  // delta^D d^D h = 2 D*D h - 2 d* d h + 2nch - 2c tr(h) g
  auto c = sphere(32);
  auto cp = curvature(c);
  calibrate_deltaD(c, 1);
  for (unsigned s : {1u, 2u}) {
    auto r = check_space_form_identity(c, cp, bump_sym2(c, s), SpaceFormIdentity::DeltaDdD);
    EXPECT_LT(r.rel_l2, 1e-6) << "seed " << s;
  }
}

TEST(TensorCalculus, OneFormWeitzenbock) {
  // 2 delta delta^* w + delta d w = 2 D*D w
  auto c = sphere(24);
  for (unsigned s : {1u, 2u}) EXPECT_LT(check_one_form_identity(c, bump_one_form(c, s)).rel_l2, 1e-6);
  auto b = ball();
  EXPECT_LT(check_one_form_identity(b, bump_one_form(b, 7)).rel_l2, 1e-6);
}

TEST(TensorCalculus, DeltaDSignCalibration) {
  // the literal (unsigned) definition is the adjoint
  for (auto c : {sphere(24), ball()}) {
    auto cal = calibrate_deltaD(c, 1);
    EXPECT_EQ(cal.sign, 1);
    EXPECT_LT(cal.defect_plus, 1e-6);
    EXPECT_GT(cal.defect_minus, 0.5);
    EXPECT_EQ(deltaD_sign(), 1);
  }
}

TEST(TensorCalculus, DeltaDAdjointOfdD) {
  auto c = sphere(24);
  calibrate_deltaD(c, 1);
  auto h = bump_sym2(c, 11);
  auto A0 = bump_tensor(c, 3, 12);
  auto A = add(A0, permute(A0, {0, 2, 1}), 0.5, -0.5);
  EXPECT_NEAR(l2_inner(c, dD(c, h), A) / l2_inner(c, h, deltaD(c, A)), 1.0, 1e-6);
}

TEST(TensorCalculus, DivStarAdjointOfDiv) {
  auto c = sphere(32);
  auto h = bump_sym2(c, 2);
  auto w = bump_one_form(c, 3);
  EXPECT_NEAR(l2_inner(c, div(c, h), w) / l2_inner(c, h, div_star(c, w)), 1.0, 1e-6);
}

TEST(TensorCalculus, ComposeWithMetric) {
  auto c = sphere(12);
  auto h = bump_sym2(c, 5);
  EXPECT_LT(rel_l2(c, compose(c, metric_field(c), h), h), 1e-12);
  EXPECT_LT(rel_l2(c, trace(c, metric_field(c)), constant_scalar(c.manifold, 3.0)), 1e-12);
}

TEST(TensorCalculus, HessianOfFirstHarmonic) {
  // D df = -c f g for l = 1
  auto c = sphere(24);
  auto f = sphere_harmonic(c.manifold, 1, 1, 2);
  EXPECT_LT(l2_norm(c, add(hess(c, f), tensor(f, metric_field(c)), 1.0, 1.0)) / l2_norm(c, hess(c, f)), 1e-8);
}

TEST(TensorCalculus, ProductCurvatureSplits) {
  ManifoldSpec s;
  s.kind = ManifoldKind::ProductSphere;
  s.dim = 3;
  s.resolution = 12;
  auto M = build_manifold(s);
  auto c = model_connection(M);
  auto cp = curvature(c);
  // |R|^2 = 2 * 12 and s = 2 * 6 on S^3 x S^3
  EXPECT_NEAR(integrate(c, pointwise_inner(c, cp.R, cp.R)) / integrate(c, constant_scalar(M, 1.0)), 24.0, 1e-8);
  EXPECT_NEAR(integrate(c, cp.scal) / integrate(c, constant_scalar(M, 1.0)), 12.0, 1e-8);
  auto fc = factor_connection(c, 1);
  EXPECT_NEAR(integrate(fc, curvature(fc).scal) / integrate(fc, constant_scalar(fc.manifold, 1.0)), 6.0, 1e-8);
}
