#include <gtest/gtest.h>

#include <cmath>

#include "rpstab/stability_report.hpp"
#include "rpstab/suites.hpp"
#include "rpstab/variation_decomposition.hpp"

using namespace rpstab;

namespace {

Verdict v(GeometryKind k, int dim, double c, double p) { return verdict({k, dim, c}, p).verdict; }

// independent Berger oracle: sectional curvatures t^2, t^2, 4 - 3t^2, volume 2 pi^2 t
double oracle_absR2(double t) { return 4.0 * (2.0 * std::pow(t, 4) + std::pow(4.0 - 3.0 * t * t, 2)); }
double oracle_tilde(double t, double p) {
  return std::pow(2.0 * M_PI * M_PI * t, 2.0 * p / 3.0) * std::pow(oracle_absR2(t), 0.5 * p);
}

}  // namespace

TEST(Verdicts, SpaceForms) {
  for (int n = 3; n <= 6; ++n)
    for (double p : {2.0, 2.5, 3.0, 4.0, 6.0, 10.0})
      EXPECT_EQ(v(GeometryKind::SphereForm, n, 1.0, p), Verdict::StrictlyStable) << n << " " << p;
  EXPECT_EQ(v(GeometryKind::Hyperbolic, 3, -1.0, 2.0), Verdict::StrictlyStable);
  auto h5 = verdict({GeometryKind::Hyperbolic, 5, -1.0}, 2.0);
  EXPECT_EQ(h5.verdict, Verdict::ConditionalOnLambda1);
  EXPECT_NEAR(h5.lambda1_threshold, 1.0 / 13.0, 1e-15);
}

TEST(Verdicts, ThresholdSign) {
  for (int n = 3; n <= 8; ++n)
    for (double p = 2.0; p <= 8.0; p += 0.5) {
      const double th = lambda1_threshold(n, -2.0, p);
      EXPECT_EQ(th <= 0.0, p >= 0.5 * n) << n << " " << p;
      EXPECT_NEAR(th, 2.0 * (n - 2 * p) / (n + 2 * p + 4), 1e-14);
    }
}

TEST(Verdicts, ProductSphere) {
  auto k = GeometryKind::ProductSphere;
  auto p2 = verdict({k, 3, 1.0}, 2.0);
  EXPECT_EQ(p2.verdict, Verdict::FlaggedDiscrepancy);
  bool saw = false;
  for (auto& e : p2.evidence)
    if (!e.holds && std::abs(e.value + 3.0) < 1e-12) saw = true;
  EXPECT_TRUE(saw) << "q1(3) = -3 expected among failing evidence";
  EXPECT_EQ(v(k, 3, 1.0, 2.5), Verdict::FlaggedDiscrepancy);
  EXPECT_EQ(v(k, 3, 1.0, 3.0), Verdict::StrictlyStable);
  EXPECT_EQ(v(k, 3, 1.0, 6.0), Verdict::StrictlyStable);
  EXPECT_EQ(v(k, 3, 1.0, 7.0), Verdict::OutsideTheoremRange);
}

TEST(Verdicts, ProductHyperbolic) {
  auto k = GeometryKind::ProductHyperbolic;
  EXPECT_EQ(v(k, 3, -1.0, 3.0), Verdict::FlaggedDiscrepancy);
  EXPECT_EQ(v(k, 3, -1.0, 4.0), Verdict::StrictlyStable);
  EXPECT_EQ(v(k, 3, -1.0, 6.0), Verdict::StrictlyStable);
}

TEST(Verdicts, BadInput) {
  EXPECT_THROW(verdict({GeometryKind::SphereForm, 3, 1.0}, 1.5), std::invalid_argument);
  EXPECT_THROW(verdict({GeometryKind::SphereForm, 2, 1.0}, 2.0), std::invalid_argument);
}

TEST(Berger, RoundPoint) {
  auto b = berger_curvature(1.0);
  for (double k : b.sectional) EXPECT_NEAR(k, 1.0, 1e-12);
  EXPECT_NEAR(b.absR2, 12.0, 1e-12);
  EXPECT_NEAR(b.volume, 2.0 * M_PI * M_PI, 1e-12);
  EXPECT_NEAR(berger_tilde_rp(1.0, 2.0), 640.158575234221, 1e-9);
  EXPECT_NEAR(berger_tilde_rp(1.0, 2.0), 12.0 * std::pow(2.0 * M_PI * M_PI, 4.0 / 3.0), 1e-9);
}

TEST(Berger, KoszulAgainstOracle) {
  EXPECT_NEAR(berger_curvature(0.7).absR2, 27.5244, 1e-10);
  for (double t : {0.05, 0.3, 0.7, 1.3})
    for (double p : {2.0, 3.0}) {
      EXPECT_NEAR(berger_tilde_rp(t, p) / oracle_tilde(t, p), 1.0, 1e-12);
      EXPECT_NEAR(berger_tilde_rp_closed(t, p) / oracle_tilde(t, p), 1.0, 1e-12);
    }
}

TEST(Berger, CriticalPoints) {
  for (double p : {2.0, 3.0}) {
    auto curve = berger_scan(p, 0.02, 1.5, 150, 1e-9);
    ASSERT_EQ(curve.critical.size(), 2u) << p;
    EXPECT_NEAR(curve.critical[0].t, 0.603022689155527, 1e-6);
    EXPECT_TRUE(curve.critical[0].maximum);
    EXPECT_NEAR(curve.critical[1].t, 1.0, 1e-6);
    EXPECT_FALSE(curve.critical[1].maximum);
  }
  EXPECT_NEAR(berger_dt(1.0, 2.0, 2) / std::pow(2.0 * M_PI * M_PI, 4.0 / 3.0), 298.666666666667, 1e-4);
  EXPECT_GT(berger_dt(1.0, 3.0, 2), 0.0);
}

TEST(Berger, DegeneratesToZero) {
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double val = berger_tilde_rp(1e-4 * i, 2.0);
    EXPECT_GT(val, prev);
    prev = val;
  }
  EXPECT_LT(berger_tilde_rp(1e-6, 2.0), 1e-3);
}

namespace {
struct S3 {
  ConnectionData c;
  CurvaturePack cp;
};
S3& s3() {
  static S3* s = [] {
    ManifoldSpec sp;
    sp.kind = ManifoldKind::RoundSphere;
    sp.dim = 3;
    sp.resolution = 16;
    auto* x = new S3{model_connection(build_manifold(sp)), {}};
    calibrate_deltaD(x->c, 1);
    x->cp = curvature(x->c);
    return x;
  }();
  return *s;
}
TensorField conformal(const ConnectionData& c, const TensorField& f) {
  auto h = compact(tensor(f, metric_field(c)));
  h.sym = Symmetry::Sym2;
  return h;
}
}  // namespace

TEST(Margin, EmptySetThrows) {
  auto& S = s3();
  EXPECT_THROW(margin_estimate(S.c, S.cp, 2.0, {}), std::invalid_argument);
}

TEST(Margin, TTSetAboveBound) {
  auto& S = s3();
  std::vector<TensorField> set{smooth_tt(S.c, 0), smooth_tt(S.c, 1)};
  EXPECT_GT(margin_estimate(S.c, S.cp, 2.0, set), 12.0);
}

TEST(Margin, FirstHarmonicsAreFlat) {
  auto& S = s3();
  std::vector<TensorField> set{conformal(S.c, sphere_harmonic(S.c.manifold, 1, 0, 1)),
                               conformal(S.c, sphere_harmonic(S.c.manifold, 1, 2, 3))};
  EXPECT_NEAR(margin_estimate(S.c, S.cp, 2.0, set), 0.0, 1e-6);
  set.push_back(smooth_tt(S.c, 0));
  EXPECT_NEAR(margin_estimate(S.c, S.cp, 2.0, set), 0.0, 1e-6);
}

TEST(Margin, HigherModesPositive) {
  auto& S = s3();
  std::vector<TensorField> set{conformal(S.c, sphere_harmonic(S.c.manifold, 2, 0, 1)), smooth_tt(S.c, 2)};
  EXPECT_GT(margin_estimate(S.c, S.cp, 3.0, set), 0.0);
}
