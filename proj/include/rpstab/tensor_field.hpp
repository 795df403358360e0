#ifndef RPSTAB_TENSOR_FIELD_HPP
#define RPSTAB_TENSOR_FIELD_HPP

#include <array>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "rpstab/manifold_atlas.hpp"

namespace rpstab {

// Covariant tensor on one factor grid, all slots lower.
// Storage is component-major: data[comp * nodes + node], slot 0 most significant.
struct DenseTensor {
  int dim = 0;
  int rank = 0;
  std::size_t nodes = 0;
  std::vector<double> data;

  DenseTensor() = default;
  DenseTensor(int dim_, int rank_, std::size_t nodes_);
  std::size_t comps() const { return data.size() / (nodes ? nodes : 1); }
  double* comp(std::size_t c) { return data.data() + c * nodes; }
  const double* comp(std::size_t c) const { return data.data() + c * nodes; }
  bool is_constant(double rtol = 1e-12) const;
};
using DensePtr = std::shared_ptr<const DenseTensor>;

std::size_t ipow(int b, int e);

// Metric state of one factor: metric, inverse, Christoffels and the ratio of
// its volume density to the model density (1 for the model metric).
struct FactorMetric {
  std::shared_ptr<const Grid> grid;
  DensePtr g;
  // component-major like DenseTensor
  std::vector<double> ginv;   // [(a*m + b) * nodes + node]
  std::vector<double> gamma;  // [((b*m + a)*m + i) * nodes + node] = Gamma^b_ai
  std::vector<double> ratio;  // nodes
};

// Connection data for a whole manifold (one FactorMetric per factor).
struct ConnectionData {
  std::shared_ptr<const DiscreteManifold> manifold;
  std::vector<std::shared_ptr<const FactorMetric>> factors;
  bool perturbed = false;
  int dim() const;
};

enum class Symmetry { None, Sym2, RiemannType };

// Separable tensor field: sum over terms of coef * (x)_f part_f, where slot s
// of the field lives on factor layout[s]. On a single manifold every term has
// one part.
struct Term {
  double coef = 1.0;
  std::vector<int> layout;
  std::vector<DensePtr> parts;
};

class TensorField {
 public:
  std::shared_ptr<const DiscreteManifold> manifold;
  int rank = 0;
  Symmetry sym = Symmetry::None;
  std::vector<Term> terms;

  TensorField() = default;
  TensorField(std::shared_ptr<const DiscreteManifold> m, int r) : manifold(std::move(m)), rank(r) {}

  // Single-factor convenience: the dense part of a one-term field.
  const DenseTensor& dense() const;
  int dim() const { return manifold->total_dim(); }
};

// Shared rank-0 part equal to 1 on a grid.
DensePtr unit_part(const std::shared_ptr<const Grid>& g);
bool is_unit(const DensePtr& p, const std::shared_ptr<const Grid>& g);

// construction
TensorField zero_field(std::shared_ptr<const DiscreteManifold> m, int rank);
TensorField from_dense(std::shared_ptr<const DiscreteManifold> m, DenseTensor t, Symmetry s = Symmetry::None);
TensorField constant_scalar(std::shared_ptr<const DiscreteManifold> m, double v);
// Scalar field on a product that depends on one factor only.
TensorField factor_scalar(std::shared_ptr<const DiscreteManifold> m, int factor, DenseTensor f);
// Lift a single-factor field to factor `factor` of a product manifold.
TensorField lift(std::shared_ptr<const DiscreteManifold> prod, int factor, const TensorField& t);
TensorField metric_field(const ConnectionData& conn);

// linear algebra
TensorField add(const TensorField& a, const TensorField& b, double alpha = 1.0, double beta = 1.0);
TensorField scale(const TensorField& a, double s);
TensorField compact(const TensorField& a);
TensorField permute(const TensorField& a, const std::vector<int>& perm);  // out slot s = in slot perm[s]
TensorField symmetrize2(const TensorField& a);                            // (a + a^T)/2 for rank 2

// metric operations
TensorField contract(const ConnectionData& c, const TensorField& a, int s1, int s2);
TensorField contract_pairs(const ConnectionData& c, const TensorField& a, const TensorField& b,
                           const std::vector<std::pair<int, int>>& pairs);
TensorField tensor(const TensorField& a, const TensorField& b);  // outer product
TensorField pointwise_inner(const ConnectionData& c, const TensorField& a, const TensorField& b);
double integrate(const ConnectionData& c, const TensorField& f);
double integrate(const TensorField& f);  // model metric, no connection needed
double l2_inner(const ConnectionData& c, const TensorField& a, const TensorField& b);
double l2_norm(const ConnectionData& c, const TensorField& a);

// Pointwise nonlinear map of a scalar field. On products it is allowed only
// when the field is constant.
TensorField pointwise_map(const TensorField& f, const std::function<double(double)>& fn);

// Dense node-by-node evaluation on a single factor (scalar fields only).
std::vector<double> scalar_values(const TensorField& f);
double max_abs(const TensorField& f);  // max over nodes and components (single factor)

// Component access for products: value of full component (indices in 0..n-1)
// at a pair of factor nodes.
double component(const TensorField& f, const std::vector<int>& idx, const std::vector<std::size_t>& nodes);

// Largest violation of the declared symmetries: max-norm on one factor,
// L2 norm on products.
double symmetry_defect(const ConnectionData& c, const TensorField& f, Symmetry s);

}  // namespace rpstab

#endif
