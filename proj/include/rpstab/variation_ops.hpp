#ifndef RPSTAB_VARIATION_OPS_HPP
#define RPSTAB_VARIATION_OPS_HPP

#include <string>
#include <vector>

#include "rpstab/tensor_calculus.hpp"
#include "rpstab/variation_decomposition.hpp"

namespace rpstab {

// First variations at the metric of `c` in the direction h.
struct VariationPack {
  double p = 2.0;
  TensorField h;
  TensorField C;             // C_h(x,y,z) = (Pi_h(x,y), z)
  TensorField Rbar;          // dR/dt
  TensorField rbar;          // Rbar(x,e_i,y,e_i)
  TensorField L;             // L_h(w,y,z)
  TensorField W;             // (D*)'(h)(R) - L_h
  TensorField Rcheck_prime;  // dRcheck/dt
  TensorField absR2_prime;   // d|R|^2/dt
  TensorField absRp_prime;   // d|R|^p/dt
};

TensorField variation_C(const ConnectionData& c, const TensorField& h);
TensorField variation_Rbar(const ConnectionData& c, const TensorField& R, const TensorField& h, const TensorField& C);
TensorField variation_L(const ConnectionData& c, const TensorField& R, const TensorField& C);
// (D*)'(h)(T) for a (0,4) tensor T independent of t.
TensorField dstar_prime(const ConnectionData& c, const TensorField& h, const TensorField& C, const TensorField& T);
TensorField variation_Rcheck(const ConnectionData& c, const TensorField& R, const TensorField& h, const TensorField& Rbar);
TensorField variation_absR2(const ConnectionData& c, const CurvaturePack& cp, const TensorField& h, const TensorField& Rbar);

VariationPack variation_pack(const ConnectionData& c, const CurvaturePack& cp, const TensorField& h, double p);

// Outcome of one identity check.
struct IdentityResidual {
  std::string name;
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  double rel_l2 = 0.0;   // ||lhs - rhs|| / max(||lhs||, ||rhs||)  (or |.|/max for scalars)
  double rel_max = 0.0;  // sup of the pointwise norm of lhs - rhs over sup of the larger side
  std::vector<std::pair<std::string, double>> extra;
};

IdentityResidual compare_fields(const ConnectionData& c, const std::string& name, const TensorField& lhs,
                                const TensorField& rhs);
IdentityResidual compare_values(const std::string& name, double lhs, double rhs);

// Space-form identities, checked at constant curvature c.
enum class SpaceFormIdentity {
  RcheckPrime,   // Rcheck'(h) = 2c^2(n+1)h - 4c^2 tr(h) g + 2c[-2 d*d h - Dd tr h + D*Dh]
  DeltaDW,       // delta^D W_h = c(n-2) delta^D d^D h + 2c Dd tr h + 2c (Lap tr h) g, paired with d^D(probe)
  DstarRbar,     // D* Rbar_h = -d^D rbar_h - L_h
  RicciPrime,    // rbar_h = 1/2 [2(n-1)c h - 2 d*d h - Dd tr h + D*Dh]
  DeltaDdD,      // delta^D d^D h = 2D*Dh - 2 d*d h + 2nc h - 2c tr(h) g
  NormPrime      // (|R|^p)'h = -2pc|R|^{p-2}(tr d*d h - Lap tr h + (n-1)c tr h)
};
std::vector<SpaceFormIdentity> space_form_identities();
std::string identity_name(SpaceFormIdentity id);

// `probe` is required for DeltaDW (strong-form residual goes into extra).
// NormPrime also reports the variant with 2 tr d*d h in extra.
IdentityResidual check_space_form_identity(const ConnectionData& c, const CurvaturePack& cp, const TensorField& h,
                                           SpaceFormIdentity id, double p = 2.0, const TensorField* probe = nullptr);

// One-form identity 2 delta delta^* w + delta d w = 2 D*D w, and Bochner
// Lap df = D*D df + (n-1)c df.
IdentityResidual check_one_form_identity(const ConnectionData& c, const TensorField& w);
IdentityResidual check_bochner(const ConnectionData& c, const TensorField& f);

// Identities on a product of two space forms of equal dimension m, in terms
// of the blocks h1, h~ (mixed) and f g1. `probe` is a second split used for
// the paired (weak) forms.
std::vector<std::string> product_identity_names();
IdentityResidual check_product_identity(const ConnectionData& c, const CurvaturePack& cp, const std::string& which,
                                        const ProductSplit& s, const ProductSplit& probe, double p = 2.0);

// Finite-difference oracles on single-factor manifolds.
TensorField fd_Rbar(const ConnectionData& c, const TensorField& h, double step = 1e-3);
TensorField fd_Rcheck(const ConnectionData& c, const TensorField& h, double step = 1e-3);

double model_curvature(const ConnectionData& c);

}  // namespace rpstab

#endif
