#include "rpstab/hessian_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace rpstab {

namespace {

template <class F>
TensorField select_terms(const TensorField& a, F keep) {
  TensorField out(a.manifold, a.rank);
  out.sym = a.sym;
  for (auto& t : a.terms)
    if (keep(t.layout)) out.terms.push_back(t);
  return out;
}

double sq(const ConnectionData& c, const TensorField& a) { return l2_inner(c, a, a); }

double mean_absR2(const ConnectionData& c, const CurvaturePack& cp) {
  return integrate(c, pointwise_inner(c, cp.R, cp.R)) / integrate(c, constant_scalar(c.manifold, 1.0));
}

// <phi g, h> = int phi tr h
double with_metric(const ConnectionData& c, const TensorField& phi, const TensorField& h) {
  return integrate(c, tensor(phi, trace(c, h)));
}

}  // namespace

Rational to_rational(double p, long long max_den) {
  for (long long q = 1; q <= max_den; ++q) {
    const double num = std::round(p * q);
    if (std::abs(num / q - p) < 1e-12) return Rational(static_cast<long long>(num), q);
  }
  throw std::invalid_argument("to_rational: p is not a small fraction");
}

double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

std::string method_name(HessianMethod m) {
  switch (m) {
    case HessianMethod::General: return "general";
    case HessianMethod::ClosedTT: return "closed_tt";
    case HessianMethod::ClosedConformal: return "closed_conformal";
    case HessianMethod::ProductClosed: return "product_closed";
    case HessianMethod::FdOracle: return "fd_oracle";
  }
  return "?";
}

double curvature_parallel_defect(const ConnectionData& c, const CurvaturePack& cp) {
  return l2_norm(c, cov_deriv(c, cp.R)) / l2_norm(c, cp.R);
}

HessianResult hessian_general(const ConnectionData& c, const CurvaturePack& cp, const TensorField& h1,
                              const TensorField& h2, double p, double parallel_tol) {
  if (p < 2.0) throw std::invalid_argument("hessian_general: p >= 2 required");
  const double defect = curvature_parallel_defect(c, cp);
  if (defect > parallel_tol) throw std::domain_error("hessian_general: curvature is not parallel");
  const int n = c.dim();
  auto vp = variation_pack(c, cp, h1, p);
  auto R2 = pointwise_inner(c, cp.R, cp.R);
  auto P = pointwise_map(R2, [p](double x) { return std::pow(x, 0.5 * p - 1.0); });
  auto Rp = pointwise_map(R2, [p](double x) { return std::pow(x, 0.5 * p); });
  // (|R|^{p-2})' = (p-2)/2 |R|^{p-4} (|R|^2)'
  auto Pprime = scale(tensor(pointwise_map(R2, [p](double x) { return std::pow(x, 0.5 * p - 2.0); }), vp.absR2_prime),
                      0.5 * (p - 2.0));
  auto dh2 = dD(c, h2);

  HessianResult r;
  r.method = HessianMethod::General;
  r.p = p;
  auto& b = r.breakdown;
  b.emplace_back("(D*)'(h1)R", -p * l2_inner(c, tensor(P, dstar_prime(c, h1, vp.C, cp.R)), dh2));
  b.emplace_back("D*Rbar", -p * l2_inner(c, tensor(P, dstar(c, vp.Rbar)), dh2));
  b.emplace_back("Rcheck'", -p * l2_inner(c, tensor(P, vp.Rcheck_prime), h2));
  b.emplace_back("(|R|^{p-2})' R", p == 2.0 ? 0.0 : -p * l2_inner(c, tensor(Pprime, cp.R), cov_deriv(c, dh2)));
  b.emplace_back("(|R|^{p-2})' g", -(p / n) * with_metric(c, tensor(R2, Pprime), h2));
  b.emplace_back("(|R|^p)' g", 0.5 * with_metric(c, vp.absRp_prime, h2));
  b.emplace_back("|R|^p <h1,h2>", (p / n) * l2_inner(c, tensor(Rp, h1), h2));
  for (auto& [name, v] : b) r.value += v;
  return r;
}

HessianResult hessian_general(const ConnectionData& c, const TensorField& h1, const TensorField& h2, double p) {
  return hessian_general(c, curvature(c), h1, h2, p);
}

TTDefect tt_defect(const ConnectionData& c, const TensorField& h) {
  const double nh = l2_norm(c, h);
  return {l2_norm(c, div(c, h)) / nh, l2_norm(c, trace(c, h)) / nh};
}

HessianResult closed_tt(const ConnectionData& c, const TensorField& h, double p, double tt_tol) {
  auto d = tt_defect(c, h);
  if (d.div > tt_tol || d.trace > tt_tol) throw std::invalid_argument("closed_tt: h is not TT");
  auto cp = curvature(c);
  const int n = c.dim();
  const double k = model_curvature(c);
  const double pre = p * std::pow(mean_absR2(c, cp), 0.5 * p - 1.0);
  HessianResult r;
  r.method = HessianMethod::ClosedTT;
  r.p = p;
  const double a = sq(c, rough_laplacian(c, h)), b = sq(c, cov_deriv(c, h)), e = sq(c, h);
  r.value = pre * (a + n * k * b + 2.0 * n * k * k * e);
  // what the constant-curvature identities actually combine to
  const double fixed = pre * (a + n * k * b + 2.0 * (n - 2) * k * k * e);
  r.breakdown = {{"||D*Dh||^2", a}, {"||Dh||^2", b}, {"||h||^2", e}, {"corrected", fixed}};
  return r;
}

double ConformalCoeffs::q(double x) const { return to_double(a) * x * x - to_double(b) * x + to_double(d); }

ConformalCoeffs conformal_coeffs(int n, const Rational& p) {
  ConformalCoeffs k;
  k.n = n;
  k.p = p;
  k.a = Rational(n - 1) + 2 * (p - 2) * (1 - Rational(1, n));
  k.b = 4 * (n - 1) * (p - 1);
  k.d = n * (n - 1) * (2 * p - n);
  return k;
}

HessianResult hessian_conformal(const ConnectionData& c, const TensorField& f, double p, double mean_tol) {
  const double V = integrate(c, constant_scalar(c.manifold, 1.0));
  const double fn = l2_norm(c, f);
  if (std::abs(integrate(c, f)) > mean_tol * std::sqrt(V) * fn)
    throw std::invalid_argument("hessian_conformal: f must have zero mean");
  auto cp = curvature(c);
  const int n = c.dim();
  const double k = model_curvature(c);
  auto co = conformal_coeffs(n, to_rational(p));
  const double pre = p * std::pow(mean_absR2(c, cp), 0.5 * p - 1.0);
  auto lap = laplace(c, f);
  const double L2 = sq(c, lap), Lf = l2_inner(c, lap, f), f2 = fn * fn;
  HessianResult r;
  r.method = HessianMethod::ClosedConformal;
  r.p = p;
  r.breakdown = {{"||Lap f||^2", L2}, {"<Lap f, f>", Lf}, {"||f||^2", f2}};
  r.value = pre * (to_double(co.a) * L2 - to_double(co.b) * k * Lf + to_double(co.d) * k * k * f2);
  return r;
}

double ProductCoeffs::q1(double x) const { return to_double(a1) * x * x + to_double(b1) * x + to_double(d1); }
double ProductCoeffs::q2(double x) const { return to_double(a2) * x * x + to_double(b2) * x + to_double(d2); }

ProductCoeffs product_coeffs(int m, const Rational& p) {
  ProductCoeffs k;
  k.m = m;
  k.p = p;
  k.a = (m + p - 2) / m;
  k.b = 2 * (p + 1);
  k.d = m * (p - m + 2);
  k.a1 = (m - 1) * k.a + m;
  k.u1 = Rational(2, m) * (Rational(3 * m * m - 3 * m - 2) - p * (m - 1));
  k.b1 = -2 * (m - 1) * (m + 3);
  k.d1 = 4 * m * (m - 1);
  k.a2 = k.a1;
  k.u2 = 2 * m;
  k.b2 = -2 * (m - 1) * (2 * p - m - 1);
  k.d2 = 4 * m * (m - 1) * (p - m);
  return k;
}

TensorField factor_laplacian(const ConnectionData& c, const TensorField& f, int factor) {
  auto hf = hess(c, f);
  auto blk = select_terms(hf, [factor](const std::vector<int>& l) { return l[0] == factor && l[1] == factor; });
  return scale(contract(c, blk, 0, 1), -1.0);
}

FactorNorms factor_norms(const ConnectionData& c, const TensorField& f) {
  FactorNorms q;
  auto L1 = factor_laplacian(c, f, 0), L2 = factor_laplacian(c, f, 1);
  q.lap1_sq = sq(c, L1);
  q.lap2_sq = sq(c, L2);
  q.lap12 = l2_inner(c, L1, L2);
  q.lap_sq = sq(c, laplace(c, f));
  auto df = ext_d(c, f);
  q.df_sq = sq(c, df);
  q.df1_sq = sq(c, select_terms(df, [](const std::vector<int>& l) { return l[0] == 0; }));
  q.df2_sq = sq(c, select_terms(df, [](const std::vector<int>& l) { return l[0] == 1; }));
  q.f_sq = sq(c, f);
  return q;
}

std::string block_name(ProductBlock b) {
  switch (b) {
    case ProductBlock::H1H1: return "H(h1,h1)";
    case ProductBlock::H2H2: return "H(h2,h2)";
    case ProductBlock::MixedMixed: return "H(h~,h~)";
    case ProductBlock::Fg1Fg1: return "H(fg1,fg1)";
    case ProductBlock::Fg1Fg2: return "H(fg1,fg2)";
    case ProductBlock::Fg2Fg2: return "H(fg2,fg2)";
    case ProductBlock::ConfMinus: return "H(fg1-fg2,fg1-fg2)";
    case ProductBlock::ConfPlus: return "H(fg1+fg2,fg1+fg2)";
  }
  return "?";
}

HessianResult product_closed(const ConnectionData& c, ProductBlock block, const ProductSplit& s, double p) {
  if (c.manifold->num_factors() != 2) throw std::invalid_argument("product_closed: product manifold required");
  auto cp = curvature(c);
  const int m = c.manifold->factors[0]->dim;
  const double k = model_curvature(c);
  const double P = std::pow(mean_absR2(c, cp), 0.5 * p - 1.0);
  auto co = product_coeffs(m, to_rational(p));
  const double a = to_double(co.a), b = to_double(co.b), d = to_double(co.d);
  HessianResult r;
  r.method = HessianMethod::ProductClosed;
  r.p = p;
  auto tt_block = [&](const TensorField& h, double c1, double c0) {
    const double A = sq(c, rough_laplacian(c, h)), B = sq(c, cov_deriv(c, h)), E = sq(c, h);
    r.breakdown = {{"||D*Dh||^2", A}, {"||Dh||^2", B}, {"||h||^2", E}};
    return p * P * (A + c1 * k * B + c0 * k * k * E);
  };
  switch (block) {
    case ProductBlock::H1H1: r.value = tt_block(s.h1, m, 2.0 * (m - 2)); return r;
    case ProductBlock::H2H2: r.value = tt_block(s.h2, m, 2.0 * (m - 2)); return r;
    case ProductBlock::MixedMixed: {
      r.value = tt_block(s.h_mixed, m - 1, 2.0 * (m - 1));
      auto dh = dD(c, s.h_mixed);
      const double K = 0.25 * sq(c, select_terms(dh, [](const std::vector<int>& l) { return l[0] == l[2]; }));
      r.breakdown.emplace_back("K", K);
      r.value -= p * P * 0.5 * k * K;
      return r;
    }
    default: break;
  }
  auto q = factor_norms(c, s.f);
  r.breakdown = {{"||Lap1 f||^2", q.lap1_sq}, {"||Lap2 f||^2", q.lap2_sq}, {"<Lap1 f,Lap2 f>", q.lap12},
                 {"||Lap f||^2", q.lap_sq},   {"||df||^2", q.df_sq},       {"||df1||^2", q.df1_sq},
                 {"||df2||^2", q.df2_sq},     {"||f||^2", q.f_sq}};
  const double k2 = k * k;
  auto diag = [&](double lapi, double lapj, double dfi) {
    return p * (m - 1) * P * (a * lapi - b * k * dfi + d * k2 * q.f_sq) + p * P * (3.0 * (m - 1) * q.lap12 + m * lapj);
  };
  switch (block) {
    case ProductBlock::Fg1Fg1: r.value = diag(q.lap1_sq, q.lap2_sq, q.df1_sq); break;
    case ProductBlock::Fg2Fg2: r.value = diag(q.lap2_sq, q.lap1_sq, q.df2_sq); break;
    case ProductBlock::Fg1Fg2:
      r.value = p * P * (2.0 * q.lap12 + m * (m - 1.0) * k * q.df_sq - m * m * (m - 1.0) * k2 * q.f_sq) +
                p * (p - 2.0) * (m - 1) * P * (q.lap12 / m - k * q.df_sq + m * k2 * q.f_sq);
      break;
    case ProductBlock::ConfMinus:
      r.value = p * P *
                (to_double(co.a1) * (q.lap1_sq + q.lap2_sq) + to_double(co.b1) * k * q.df_sq +
                 2.0 * to_double(co.d1) * k2 * q.f_sq + to_double(co.u1) * q.lap12);
      break;
    case ProductBlock::ConfPlus:
      r.value = p * P *
                (to_double(co.a2) * q.lap_sq + to_double(co.u2) * q.lap12 + to_double(co.b2) * k * q.df_sq +
                 to_double(co.d2) * k2 * q.f_sq);
      break;
    default: break;
  }
  return r;
}

HessianResult fd_oracle(const ConnectionData& c, const TensorField& h, double p, double step, int levels) {
  auto est = fd_derivative([&](double t) { return rp_along(c, h, t, p, true); }, 2, step, levels);
  HessianResult r;
  r.method = HessianMethod::FdOracle;
  r.p = p;
  r.value = est.value;
  r.fd_error = est.error;
  return r;
}

}  // namespace rpstab
