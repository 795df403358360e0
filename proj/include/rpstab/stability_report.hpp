#ifndef RPSTAB_STABILITY_REPORT_HPP
#define RPSTAB_STABILITY_REPORT_HPP

#include <array>
#include <string>
#include <vector>

#include "rpstab/hessian_engine.hpp"

namespace rpstab {

enum class GeometryKind { SphereForm, Hyperbolic, ProductSphere, ProductHyperbolic, SphereTimesHyperbolic };
std::string geometry_name(GeometryKind k);

struct GeometryDesc {
  GeometryKind kind = GeometryKind::SphereForm;
  int dim = 3;  // n for space forms, factor dimension m for products
  double curvature = 1.0;
  int total_dim() const;
};

enum class Verdict { StrictlyStable, ConditionalOnLambda1, OutsideTheoremRange, FlaggedDiscrepancy };
std::string verdict_name(Verdict v);

struct Evidence {
  std::string name;
  double value = 0.0;
  bool claimed_positive = true;  // the argument needs value > 0 (>= 0 when false)
  bool holds = true;
};

struct StabilityVerdict {
  GeometryDesc geometry;
  double p = 2.0;
  bool theorem_claims_stable = false;  // what the theorem asserts for (geometry, p)
  Verdict verdict = Verdict::OutsideTheoremRange;
  double lambda1_threshold = 0.0;  // hyperbolic p < n/2 only
  std::vector<Evidence> evidence;
  std::string note;
};

// |c|(n - 2p)/(n + 2p + 4)
double lambda1_threshold(int n, double c, double p);
StabilityVerdict verdict(const GeometryDesc& g, double p);

// min over the set of H(h,h)/||h||^2 (general formula); throws on an empty set.
double margin_estimate(const ConnectionData& c, const CurvaturePack& cp, double p, const std::vector<TensorField>& set);

// Left-invariant Berger metric on SU(2): e1 scaled by t, [e_i, e_j] = 2 e_k cyclic.
struct BergerCurvature {
  double t = 1.0;
  std::array<double, 3> sectional{};  // K(E1,E2), K(E1,E3), K(E2,E3)
  double absR2 = 0.0;
  double volume = 0.0;
};
// Koszul formula on the Lie algebra.
BergerCurvature berger_curvature(double t);
double berger_tilde_rp(double t, double p);             // from berger_curvature
double berger_tilde_rp_closed(double t, double p);      // (2 pi^2 t)^{2p/3} |R|^p with the closed |R|^2
double berger_dt(double t, double p, int order);        // t-derivatives of berger_tilde_rp (central, Richardson)

struct BergerCritical {
  double t = 0.0;
  double second_derivative = 0.0;
  bool maximum = false;
};
struct BergerCurve {
  double p = 2.0;
  std::vector<double> t, value;
  std::vector<BergerCritical> critical;
};
BergerCurve berger_scan(double p, double t_min, double t_max, int samples, double tol);

}  // namespace rpstab

#endif
