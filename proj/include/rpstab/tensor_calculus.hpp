#ifndef RPSTAB_TENSOR_CALCULUS_HPP
#define RPSTAB_TENSOR_CALCULUS_HPP

#include <stdexcept>
#include <string>

#include "rpstab/tensor_field.hpp"

namespace rpstab {

struct SingularMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Connection of a metric given as a field with block (per-factor) structure.
ConnectionData christoffel(const TensorField& metric);
// Connection of the sampled model metric.
ConnectionData model_connection(std::shared_ptr<const DiscreteManifold> m);
// g + t h on a single-factor manifold.
ConnectionData perturbed_connection(const ConnectionData& base, const TensorField& h, double t);
// Max deviation between generic and closed-form Christoffels, relative to max |Gamma|.
double christoffel_closed_form_defect(const ConnectionData& c);

// Factor k of a product as a manifold of its own (same grid), and the
// matching connection.
std::shared_ptr<const DiscreteManifold> factor_manifold(std::shared_ptr<const DiscreteManifold> prod, int k);
ConnectionData factor_connection(const ConnectionData& c, int k);

struct CurvaturePack {
  TensorField R;       // (0,4), R(x,y,z,t)
  TensorField ric;     // r(x,y) = R(x,e_i,y,e_i)
  TensorField scal;    // s
  TensorField Rcheck;  // R(x,e_i,e_j,e_k) R(y,e_i,e_j,e_k)
};
TensorField curvature_tensor(const ConnectionData& c);
CurvaturePack curvature(const ConnectionData& c);
CurvaturePack curvature_from(const ConnectionData& c, TensorField R);

// DT(a, rest) = (D_a T)(rest): the new slot comes first.
TensorField cov_deriv(const ConnectionData& c, const TensorField& T);
TensorField dstar(const ConnectionData& c, const TensorField& T);            // -tr_{0,1} DT
TensorField rough_laplacian(const ConnectionData& c, const TensorField& T);  // D*D
TensorField div(const ConnectionData& c, const TensorField& h);              // delta_g
TensorField div_star(const ConnectionData& c, const TensorField& w);         // delta_g^*
TensorField dD(const ConnectionData& c, const TensorField& a);               // d^D on sym2
TensorField deltaD(const ConnectionData& c, const TensorField& A);           // delta^D, calibrated sign
TensorField deltaD_signed(const ConnectionData& c, const TensorField& A, int sign);
TensorField laplace(const ConnectionData& c, const TensorField& f);          // -tr D df
TensorField ext_d(const ConnectionData& c, const TensorField& w);            // functions or one-forms
TensorField ext_delta(const ConnectionData& c, const TensorField& b);        // one-forms or two-forms
TensorField compose(const ConnectionData& c, const TensorField& h, const TensorField& k);
TensorField trace(const ConnectionData& c, const TensorField& h);
TensorField hess(const ConnectionData& c, const TensorField& f);             // D d f

struct SignCalibration {
  int sign = 1;
  double defect_plus = 0.0;   // relative adjointness defect with sign +1
  double defect_minus = 0.0;  // same with -1
};
// Pairs d^D h against A for seeded compactly supported fields, picks the
// sign of delta^D that makes it the adjoint and installs it globally.
SignCalibration calibrate_deltaD(const ConnectionData& c, unsigned seed = 1);
int deltaD_sign();
void set_deltaD_sign(int s);

}  // namespace rpstab

#endif
