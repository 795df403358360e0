#ifndef RPSTAB_SPECTRAL_HPP
#define RPSTAB_SPECTRAL_HPP

#include <Eigen/Dense>
#include <vector>

namespace rpstab {

enum class AxisKind { Periodic, Chebyshev };

// One coordinate direction: nodes, quadrature weights and dense
// first/second derivative matrices.
struct Axis {
  AxisKind kind = AxisKind::Periodic;
  int n = 0;
  double lo = 0.0, hi = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd d1, d2;
};

// Periodic grid on [0, 2pi) with nodes (j + 1/2) 2pi/n, so angle 0 and pi
// are never sampled. Weights integrate F(t) |sin t|^sin_power exactly for
// trigonometric F of degree < n/2.
Axis periodic_axis(int n, int sin_power);

// Chebyshev-Lobatto grid on [lo, hi] with Clenshaw-Curtis weights.
Axis chebyshev_axis(int n, double lo, double hi);

// Exact integral of |sin t|^p cos(k t) over [0, 2pi].
double sin_power_moment(int p, int k);

}  // namespace rpstab

#endif
