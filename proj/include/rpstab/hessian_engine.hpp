#ifndef RPSTAB_HESSIAN_ENGINE_HPP
#define RPSTAB_HESSIAN_ENGINE_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "rpstab/functional_rp.hpp"
#include "rpstab/variation_ops.hpp"

namespace rpstab {

using Rational = boost::rational<long long>;
// p as an exact fraction (denominator <= max_den); throws if p is not one.
Rational to_rational(double p, long long max_den = 1000);
double to_double(const Rational& r);

enum class HessianMethod { General, ClosedTT, ClosedConformal, ProductClosed, FdOracle };
std::string method_name(HessianMethod m);

struct HessianResult {
  double value = 0.0;
  HessianMethod method = HessianMethod::General;
  double p = 2.0;
  // general formula only: the seven pairings, in order
  //  -p|R|^{p-2} <(D*)'(h1)R, d^D h2>        -p|R|^{p-2} <D* Rbar_h1, d^D h2>
  //  -p|R|^{p-2} <Rcheck'(h1), h2>            -p <(|R|^{p-2})'(h1) R, D d^D h2>
  //  -(p/n)|R|^2 <(|R|^{p-2})'(h1) g, h2>     1/2 <(|R|^p)'(h1) g, h2>
  //  (p/n)|R|^p <h1, h2>
  std::vector<std::pair<std::string, double>> breakdown;
  double fd_error = 0.0;  // fd_oracle only
};

// ||DR|| / ||R|| in L2
double curvature_parallel_defect(const ConnectionData& c, const CurvaturePack& cp);

// Second variation at a locally symmetric critical metric. Throws
// std::domain_error when the parallel defect exceeds parallel_tol.
HessianResult hessian_general(const ConnectionData& c, const CurvaturePack& cp, const TensorField& h1,
                              const TensorField& h2, double p, double parallel_tol = 1e-8);
HessianResult hessian_general(const ConnectionData& c, const TensorField& h1, const TensorField& h2, double p);

struct TTDefect {
  double div = 0.0;    // ||delta h|| / ||h||
  double trace = 0.0;  // ||tr h|| / ||h||
};
TTDefect tt_defect(const ConnectionData& c, const TensorField& h);

// p|R|^{p-2} (||D*Dh||^2 + nc||Dh||^2 + 2nc^2||h||^2); h must be TT within tt_tol.
HessianResult closed_tt(const ConnectionData& c, const TensorField& h, double p, double tt_tol = 1e-6);

struct ConformalCoeffs {
  int n = 3;
  Rational p;
  Rational a, b, d;
  Rational q(const Rational& x) const { return a * x * x - b * x + d; }
  double q(double x) const;
};
ConformalCoeffs conformal_coeffs(int n, const Rational& p);

// p|R|^{p-2} (a||Lap f||^2 - bc<Lap f, f> + dc^2||f||^2); f must have zero mean.
HessianResult hessian_conformal(const ConnectionData& c, const TensorField& f, double p, double mean_tol = 1e-8);

struct ProductCoeffs {
  int m = 3;
  Rational p;
  Rational a, b, d;  // blocks H(fg_i, fg_i)
  Rational a1, u1, b1, d1;
  Rational a2, u2, b2, d2;
  double q1(double x) const;
  double q2(double x) const;
};
ProductCoeffs product_coeffs(int m, const Rational& p);

// Quadrature quantities of f on M1 x M2.
struct FactorNorms {
  double lap1_sq = 0, lap2_sq = 0, lap12 = 0;  // ||Lap_1 f||^2, ||Lap_2 f||^2, <Lap_1 f, Lap_2 f>
  double lap_sq = 0;                           // ||Lap f||^2
  double df_sq = 0, df1_sq = 0, df2_sq = 0, f_sq = 0;
};
FactorNorms factor_norms(const ConnectionData& c, const TensorField& f);
TensorField factor_laplacian(const ConnectionData& c, const TensorField& f, int factor);

enum class ProductBlock { H1H1, H2H2, MixedMixed, Fg1Fg1, Fg1Fg2, Fg2Fg2, ConfMinus, ConfPlus };
std::string block_name(ProductBlock b);

// Closed-form block values on a product of two equal space forms, using the
// coefficient lists above. MixedMixed includes the -(c/2)K term.
HessianResult product_closed(const ConnectionData& c, ProductBlock block, const ProductSplit& s, double p);

// Second derivative of R~_p along g + t h at t=0 (single-factor manifolds;
// intended at unit volume and for h orthogonal to Im delta^*).
HessianResult fd_oracle(const ConnectionData& c, const TensorField& h, double p, double step = 2e-2, int levels = 2);

}  // namespace rpstab

#endif
