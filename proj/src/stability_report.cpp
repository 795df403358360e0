#include "rpstab/stability_report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rpstab {

std::string geometry_name(GeometryKind k) {
  switch (k) {
    case GeometryKind::SphereForm: return "spherical space form";
    case GeometryKind::Hyperbolic: return "hyperbolic manifold";
    case GeometryKind::ProductSphere: return "product of spherical space forms";
    case GeometryKind::ProductHyperbolic: return "product of hyperbolic manifolds";
    case GeometryKind::SphereTimesHyperbolic: return "spherical x hyperbolic";
  }
  return "?";
}

int GeometryDesc::total_dim() const {
  return (kind == GeometryKind::SphereForm || kind == GeometryKind::Hyperbolic) ? dim : 2 * dim;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::StrictlyStable: return "StrictlyStable";
    case Verdict::ConditionalOnLambda1: return "ConditionalOnLambda1";
    case Verdict::OutsideTheoremRange: return "OutsideTheoremRange";
    case Verdict::FlaggedDiscrepancy: return "FlaggedDiscrepancy";
  }
  return "?";
}

double lambda1_threshold(int n, double c, double p) { return std::abs(c) * (n - 2.0 * p) / (n + 2.0 * p + 4.0); }

namespace {

void add(StabilityVerdict& v, const std::string& name, double value, bool strict = true) {
  v.evidence.push_back({name, value, strict, strict ? value > 0.0 : value >= 0.0});
}

}  // namespace

StabilityVerdict verdict(const GeometryDesc& g, double p) {
  if (p < 2.0) throw std::invalid_argument("verdict: p >= 2 required");
  if (g.dim < 3) throw std::invalid_argument("verdict: dimension >= 3 required");
  StabilityVerdict v;
  v.geometry = g;
  v.p = p;
  const int n = g.total_dim();
  const int m = g.dim;
  const double c = std::abs(g.curvature);
  const Rational pr = to_rational(p);
  switch (g.kind) {
    case GeometryKind::SphereForm: {
      v.theorem_claims_stable = true;
      auto k = conformal_coeffs(n, pr);
      // TT: the stated constant and the one the identities give
      add(v, "TT constant 2nc^2", 2.0 * n * c * c);
      add(v, "TT constant 2(n-2)c^2 (recomputed)", 2.0 * (n - 2) * c * c);
      add(v, "a", to_double(k.a));
      add(v, "q(n)", k.q(double(n)), false);
      add(v, "a n - d/n (q(x)/(x-n) at x=n)", to_double(k.a) * n - to_double(k.d) / n);
      break;
    }
    case GeometryKind::Hyperbolic: {
      auto k = conformal_coeffs(n, pr);
      add(v, "a", to_double(k.a));
      add(v, "b", to_double(k.b));
      v.lambda1_threshold = lambda1_threshold(n, c, p);
      if (2.0 * p >= n) {
        v.theorem_claims_stable = true;
        add(v, "d", to_double(k.d), false);
      } else {
        add(v, "lambda1 threshold", v.lambda1_threshold);
      }
      break;
    }
    case GeometryKind::ProductSphere:
    case GeometryKind::ProductHyperbolic: {
      const bool sph = g.kind == GeometryKind::ProductSphere;
      v.theorem_claims_stable = sph ? p <= n : (2.0 * p >= n && p <= n);
      auto k = product_coeffs(m, pr);
      add(v, "u1", to_double(k.u1), false);
      add(v, "TT h1 constant 2(m-2)c^2", 2.0 * (m - 2) * c * c);
      add(v, "h~ constant 7/4 c^2 (m-1)", 1.75 * c * c * (m - 1));
      if (sph) {
        add(v, "h~ constant (m - 5/4)", m - 1.25);
        add(v, "q1(m)", k.q1(m));
        add(v, "q1'(m) = 2 a1 m + b1", 2.0 * to_double(k.a1) * m + to_double(k.b1));
        add(v, "2 a2 m + b2", 2.0 * to_double(k.a2) * m + to_double(k.b2));
        add(v, "q2(m)", k.q2(m));
      } else {
        add(v, "-b1", -to_double(k.b1));
        add(v, "d1", to_double(k.d1));
        add(v, "-b2", -to_double(k.b2));
        add(v, "d2", to_double(k.d2));
      }
      break;
    }
    case GeometryKind::SphereTimesHyperbolic:
      v.verdict = Verdict::OutsideTheoremRange;
      v.note = "critical point (equal dimensions); stability not covered";
      return v;
  }
  const bool all = std::all_of(v.evidence.begin(), v.evidence.end(), [](const Evidence& e) { return e.holds; });
  if (!v.theorem_claims_stable) {
    if (g.kind == GeometryKind::Hyperbolic && p >= 2.0 && 2.0 * p < n) {
      v.verdict = Verdict::ConditionalOnLambda1;
      v.note = "stable if lambda1 > threshold";
    } else {
      v.verdict = Verdict::OutsideTheoremRange;
    }
  } else {
    v.verdict = all ? Verdict::StrictlyStable : Verdict::FlaggedDiscrepancy;
  }
  return v;
}

double margin_estimate(const ConnectionData& c, const CurvaturePack& cp, double p, const std::vector<TensorField>& set) {
  if (set.empty()) throw std::invalid_argument("margin_estimate: empty test set");
  double best = 1e300;
  for (auto& h : set) best = std::min(best, hessian_general(c, cp, h, h, p).value / l2_inner(c, h, h));
  return best;
}

BergerCurvature berger_curvature(double t) {
  // orthonormal frame E1 = e1/t, E2 = e2, E3 = e3; [E_i, E_j] = sum_k C[i][j][k] E_k
  double C[3][3][3] = {};
  auto set = [&](int i, int j, int k, double v) {
    C[i][j][k] = v;
    C[j][i][k] = -v;
  };
  set(1, 2, 0, 2.0 * t);
  set(2, 0, 1, 2.0 / t);
  set(0, 1, 2, 2.0 / t);
  // Koszul: G[i][j][k] = <nabla_{E_i} E_j, E_k>
  double G[3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) G[i][j][k] = 0.5 * (C[i][j][k] - C[j][k][i] + C[k][i][j]);
  // R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z ; Rm[i][j][k][l] = <R(E_i,E_j)E_k, E_l>
  double Rm[3][3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int a = 0; a < 3; ++a) {
            s += G[j][k][a] * G[i][a][l] - G[i][k][a] * G[j][a][l];
            s -= C[i][j][a] * G[a][k][l];
          }
          Rm[i][j][k][l] = s;
        }
  BergerCurvature b;
  b.t = t;
  // K(X,Y) = <R(X,Y)Y, X>
  b.sectional = {Rm[0][1][1][0], Rm[0][2][2][0], Rm[1][2][2][1]};
  for (auto& a : Rm)
    for (auto& bb : a)
      for (auto& cc : bb)
        for (double x : cc) b.absR2 += x * x;
  b.volume = 2.0 * M_PI * M_PI * t;
  return b;
}

double berger_tilde_rp(double t, double p) {
  auto b = berger_curvature(t);
  return std::pow(b.volume, 2.0 * p / 3.0) * std::pow(b.absR2, 0.5 * p);
}

double berger_tilde_rp_closed(double t, double p) {
  const double s = 4.0 - 3.0 * t * t;
  const double R2 = 4.0 * (s * s + 2.0 * t * t * t * t);
  return std::pow(2.0 * M_PI * M_PI * t, 2.0 * p / 3.0) * std::pow(R2, 0.5 * p);
}

double berger_dt(double t, double p, int order) {
  auto F = [&](double s) { return berger_tilde_rp(t + s, p); };
  return fd_derivative(F, order, std::min(1e-2, 0.25 * t), 3).value;
}

BergerCurve berger_scan(double p, double t_min, double t_max, int samples, double tol) {
  if (!(t_min > 0.0 && t_max > t_min)) throw std::invalid_argument("berger_scan: need 0 < t_min < t_max");
  if (samples < 3) throw std::invalid_argument("berger_scan: need >= 3 samples");
  BergerCurve curve;
  curve.p = p;
  std::vector<double> d;
  for (int i = 0; i < samples; ++i) {
    const double t = t_min + (t_max - t_min) * i / (samples - 1);
    curve.t.push_back(t);
    curve.value.push_back(berger_tilde_rp(t, p));
    d.push_back(berger_dt(t, p, 1));
  }
  auto record = [&](double t) {
    BergerCritical cr;
    cr.t = t;
    cr.second_derivative = berger_dt(t, p, 2);
    cr.maximum = cr.second_derivative < 0.0;
    curve.critical.push_back(cr);
  };
  for (int i = 0; i + 1 < samples; ++i) {
    if (d[i] == 0.0) {
      record(curve.t[i]);
      continue;
    }
    if (d[i] * d[i + 1] >= 0.0) continue;
    double a = curve.t[i], b = curve.t[i + 1], da = d[i];
    while (b - a > tol) {
      const double mid = 0.5 * (a + b), dm = berger_dt(mid, p, 1);
      if (dm * da > 0.0) {
        a = mid;
        da = dm;
      } else {
        b = mid;
      }
    }
    record(0.5 * (a + b));
  }
  return curve;
}

}  // namespace rpstab
