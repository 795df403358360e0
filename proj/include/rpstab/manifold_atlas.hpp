#ifndef RPSTAB_MANIFOLD_ATLAS_HPP
#define RPSTAB_MANIFOLD_ATLAS_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "rpstab/spectral.hpp"

namespace rpstab {

enum class ManifoldKind { RoundSphere, HyperbolicBall, ProductSphere, BergerSphere };

std::string to_string(ManifoldKind k);
ManifoldKind manifold_kind_from_string(const std::string& s);

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::RoundSphere;
  int dim = 3;  // per-factor dimension m for products
  double curvature = 1.0;
  double berger_t = 1.0;
  int resolution = 24;
  double support_radius = 0.9;  // fraction of the chart half-width
  double ball_half_width = 0.5; // hyperbolic chart is the cube [-L, L]^dim
};

// Grid for one factor. Round spheres use hyperspherical angles, each running
// over a full period; the angle map is then a smooth 2^(m-1)-fold cover of
// the sphere and pulled-back covariant tensors are smooth periodic functions.
class Grid {
 public:
  ManifoldKind kind = ManifoldKind::RoundSphere;
  int dim = 0;
  int ambient = 0;  // embedding dimension (m+1 on spheres, m on the ball)
  double curvature = 0.0;
  double radius = 0.0;  // sphere radius, or chart half-width on the ball
  std::size_t nodes = 0;
  std::vector<Axis> axes;
  std::vector<std::size_t> stride;

  std::vector<double> coords;       // nodes x dim
  std::vector<double> X;            // nodes x ambient
  std::vector<double> J;            // nodes x ambient x dim
  std::vector<double> weight;       // quadrature weight incl. volume density
  std::vector<double> model_g;      // nodes x dim x dim
  std::vector<double> model_dg;     // nodes x dim^3, [k][i][j] = d_k g_ij
  std::vector<double> model_gamma;  // closed-form Christoffels, [b][a][i] = Gamma^b_ai

  // out = d/dx^axis (order 1 or 2) of a node array.
  void diff(int axis, const double* in, double* out, int order = 1) const;

  double dist_from_center(std::size_t node) const;  // chart radius on the ball, 0 on spheres
};

class DiscreteManifold {
 public:
  ManifoldSpec spec;
  std::vector<std::shared_ptr<const Grid>> factors;  // 1, or 2 for products
  int total_dim() const;
  int num_factors() const { return static_cast<int>(factors.size()); }
  double volume() const;  // closed form
};

std::shared_ptr<const DiscreteManifold> build_manifold(const ManifoldSpec& spec);

// Rescale the curvature so the model has unit volume (spheres and sphere
// products only; the ball chart is left unchanged).
ManifoldSpec unit_volume(const ManifoldSpec& spec);

double sphere_volume(int n, double c);

}  // namespace rpstab

#endif
