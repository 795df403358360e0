#ifndef RPSTAB_FUNCTIONAL_RP_HPP
#define RPSTAB_FUNCTIONAL_RP_HPP

#include <functional>

#include "rpstab/tensor_calculus.hpp"

namespace rpstab {

struct FunctionalValue {
  double p = 2.0;
  double value = 0.0;   // int |R|^p dv
  double volume = 0.0;
  double absR_min = 0.0, absR_max = 0.0, absR_mean = 0.0;
};

FunctionalValue rp_value(const ConnectionData& c, double p);
FunctionalValue rp_value(const ConnectionData& c, const CurvaturePack& cp, double p);
// V^{2p/n - 1} R_p
double tilde_rp(const ConnectionData& c, double p);

struct GradientField {
  double p = 2.0;
  TensorField ambient;      // -p delta^D D*(|R|^{p-2} R) - p|R|^{p-2} Rcheck + |R|^p g / 2
  TensorField constrained;  // ambient + (p/n - 1/2) (R_p / V) g
};

GradientField rp_gradient(const ConnectionData& c, double p);
GradientField rp_gradient(const ConnectionData& c, const CurvaturePack& cp, double p);

// R_p (or R~_p) at g + t h; single-factor manifolds.
double rp_along(const ConnectionData& base, const TensorField& h, double t, double p, bool tilde = false);

struct FdEstimate {
  double value = 0.0;
  double error = 0.0;  // |estimate - estimate at twice the step|
};
// Central differences of F at 0 with `levels` Richardson steps.
FdEstimate fd_derivative(const std::function<double(double)>& F, int order, double step, int levels = 1);

}  // namespace rpstab

#endif
