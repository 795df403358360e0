#ifndef RPSTAB_VARIATION_DECOMPOSITION_HPP
#define RPSTAB_VARIATION_DECOMPOSITION_HPP

#include <vector>

#include "rpstab/tensor_calculus.hpp"

namespace rpstab {

// Seeded smooth test fields on a single-factor manifold. On spheres they are
// pullbacks of ambient polynomial-times-exponential fields concentrated near
// a random point; on the ball chart they are Gaussians centred near the
// origin, negligible at the chart boundary.
TensorField bump_scalar(const ConnectionData& c, unsigned seed);
TensorField bump_one_form(const ConnectionData& c, unsigned seed);
TensorField bump_sym2(const ConnectionData& c, unsigned seed);
TensorField bump_tensor(const ConnectionData& c, int rank, unsigned seed);

// Multiply by a smooth cutoff supported in the chart ball of the given
// radius (fraction of the chart half-width), or a geodesic cap on spheres.
TensorField bump(const ConnectionData& c, const TensorField& field, double radius);
// Largest |component| outside the support radius relative to the global max.
double support_leak(const TensorField& field, double radius);

// Re((X_a + i X_b)^l) / R^l restricted to the sphere (single factor, or
// factor `factor` of a product).
DenseTensor harmonic_values(const Grid& g, int l, int a, int b);
TensorField sphere_harmonic(std::shared_ptr<const DiscreteManifold> m, int l, int a, int b, int factor = 0);

struct SplitVariation {
  TensorField h_tt;
  TensorField f;      // conformal part f g
  TensorField omega;  // gauge part delta^* omega
  int iterations = 0;
  std::vector<double> residual_history;  // relative normal-equation residuals
  double reassembly_error = 0.0;         // ||h - (h_tt + delta^* omega + f g)|| / ||h||
  bool converged = false;
  bool stagnated = false;  // residual stopped falling above tol: discretisation floor, result still returned
};

// Least-squares removal of Im delta^* + C(M) g. The trace part is solved
// exactly; the divergence condition by preconditioned GMRES. Throws only when
// max_iter is spent.
SplitVariation tt_project(const ConnectionData& c, const TensorField& h, double tol = 1e-8, int max_iter = -1);

struct TTSample {
  TensorField h;
  unsigned seed_used = 0;
  int retries = 0;
};
TTSample tt_generator(const ConnectionData& c, unsigned seed, double tol = 1e-10);

struct ProductSplit {
  TensorField h1, h2, h_mixed, f;
  double trace_defect = 0.0;
};
// h = h1 + f g1 + h_mixed + h2 - f g2 on a product of two factors.
ProductSplit product_split(const ConnectionData& c, const TensorField& h);
TensorField product_assemble(const ConnectionData& c, const ProductSplit& s);
// Seeded separable blocks on a product: h1 (h2) trace-free, tangent to and
// depending on the first (second) factor only; h_mixed = a1 (.) b2 with one-forms
// from each factor; f = f1 f2.
ProductSplit product_sample(const ConnectionData& c, unsigned seed);
// Metric of one factor as a field on the product.
TensorField factor_metric_field(const ConnectionData& c, int factor);

}  // namespace rpstab

#endif
