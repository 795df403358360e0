#include "rpstab/manifold_atlas.hpp"
#include "rpstab/parallel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace rpstab {

std::string to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::RoundSphere: return "RoundSphere";
    case ManifoldKind::HyperbolicBall: return "HyperbolicBall";
    case ManifoldKind::ProductSphere: return "ProductSphere";
    case ManifoldKind::BergerSphere: return "BergerSphere";
  }
  return "?";
}

ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "RoundSphere") return ManifoldKind::RoundSphere;
  if (s == "HyperbolicBall") return ManifoldKind::HyperbolicBall;
  if (s == "ProductSphere") return ManifoldKind::ProductSphere;
  if (s == "BergerSphere") return ManifoldKind::BergerSphere;
  throw std::invalid_argument("unknown manifold kind: " + s);
}

double sphere_volume(int n, double c) {
  const double unit = 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
  return unit * std::pow(c, -0.5 * n);
}

void Grid::diff(int a, const double* in, double* out, int order) const {
  const Axis& ax = axes[a];
  const Eigen::MatrixXd& D = order == 2 ? ax.d2 : ax.d1;
  const std::size_t s = stride[a], n = ax.n;
  const std::size_t outer = nodes / (n * s);
  parallel_for(outer * s, [&](std::size_t line) {
    const std::size_t o = line / s, i = line % s;
    const std::size_t base = o * n * s + i;
    double buf[512];
    for (std::size_t k = 0; k < n; ++k) buf[k] = in[base + k * s];
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += D(j, k) * buf[k];
      out[base + j * s] = acc;
    }
  });
}

double Grid::dist_from_center(std::size_t node) const {
  if (kind != ManifoldKind::HyperbolicBall) return 0.0;
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += coords[node * dim + a] * coords[node * dim + a];
  return std::sqrt(r2);
}

namespace {

void fill_index(Grid& G) {
  G.stride.assign(G.dim, 1);
  for (int a = G.dim - 2; a >= 0; --a) G.stride[a] = G.stride[a + 1] * G.axes[a + 1].n;
  G.nodes = G.stride[0] * G.axes[0].n;
  G.coords.resize(G.nodes * G.dim);
  for (std::size_t p = 0; p < G.nodes; ++p)
    for (int a = 0; a < G.dim; ++a)
      G.coords[p * G.dim + a] = G.axes[a].nodes[(p / G.stride[a]) % G.axes[a].n];
}

void fill_gamma(Grid& G) {
  const int m = G.dim;
  G.model_gamma.assign(G.nodes * m * m * m, 0.0);
  for (std::size_t p = 0; p < G.nodes; ++p) {
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) g(i, j) = G.model_g[p * m * m + i * m + j];
    const Eigen::MatrixXd gi = g.inverse();
    const double* dg = &G.model_dg[p * m * m * m];
    auto d = [&](int k, int i, int j) { return dg[k * m * m + i * m + j]; };
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a)
        for (int i = 0; i < m; ++i) {
          double s = 0.0;
          for (int e = 0; e < m; ++e) s += gi(b, e) * (d(a, i, e) + d(i, a, e) - d(e, a, i));
          G.model_gamma[p * m * m * m + b * m * m + a * m + i] = 0.5 * s;
        }
  }
}

std::shared_ptr<Grid> sphere_grid(int m, double c, int res) {
  auto G = std::make_shared<Grid>();
  G->kind = ManifoldKind::RoundSphere;
  G->dim = m;
  G->ambient = m + 1;
  G->curvature = c;
  const double rho = 1.0 / std::sqrt(c);
  G->radius = rho;
  for (int k = 0; k < m; ++k) G->axes.push_back(periodic_axis(res, m - 1 - k));
  fill_index(*G);

  const int E = m + 1;
  G->X.resize(G->nodes * E);
  G->J.assign(G->nodes * E * m, 0.0);
  G->weight.resize(G->nodes);
  G->model_g.assign(G->nodes * m * m, 0.0);
  G->model_dg.assign(G->nodes * m * m * m, 0.0);
  const double cover = std::pow(2.0, m - 1);
  for (std::size_t p = 0; p < G->nodes; ++p) {
    std::vector<double> s(m), co(m);
    double w = std::pow(rho, m) / cover;
    for (int k = 0; k < m; ++k) {
      const double t = G->coords[p * m + k];
      s[k] = std::sin(t);
      co[k] = std::cos(t);
      w *= G->axes[k].weights[(p / G->stride[k]) % G->axes[k].n];
    }
    G->weight[p] = w;
    // X_A = rho * prod_{j<A} sin_j * cos_A  (A < m),  X_m = rho * prod_{j<m} sin_j
    for (int A = 0; A <= m; ++A) {
      auto factor = [&](int j, int i) {  // value of the j-th factor, differentiated if i == j
        if (j < A || A == m) return i == j ? co[j] : s[j];
        return i == j ? -s[j] : co[j];  // j == A
      };
      const int last = (A == m) ? m - 1 : A;
      double v = rho;
      for (int j = 0; j <= last; ++j) v *= factor(j, -1);
      G->X[p * E + A] = v;
      for (int i = 0; i <= last; ++i) {
        double dv = rho;
        for (int j = 0; j <= last; ++j) dv *= factor(j, i);
        G->J[(p * E + A) * m + i] = dv;
      }
    }
    for (int k = 0; k < m; ++k) {
      double gk = rho * rho;
      for (int j = 0; j < k; ++j) gk *= s[j] * s[j];
      G->model_g[p * m * m + k * m + k] = gk;
      for (int i = 0; i < k; ++i)
        G->model_dg[p * m * m * m + i * m * m + k * m + k] = 2.0 * co[i] / s[i] * gk;
    }
  }
  fill_gamma(*G);
  return G;
}

std::shared_ptr<Grid> ball_grid(int m, double c, int res, double L) {
  auto G = std::make_shared<Grid>();
  G->kind = ManifoldKind::HyperbolicBall;
  G->dim = m;
  G->ambient = m;
  G->curvature = c;
  G->radius = L;
  for (int k = 0; k < m; ++k) G->axes.push_back(chebyshev_axis(res, -L, L));
  fill_index(*G);
  G->X = G->coords;
  G->J.assign(G->nodes * m * m, 0.0);
  G->weight.resize(G->nodes);
  G->model_g.assign(G->nodes * m * m, 0.0);
  G->model_dg.assign(G->nodes * m * m * m, 0.0);
  const double ac = std::abs(c);
  for (std::size_t p = 0; p < G->nodes; ++p) {
    double r2 = 0.0, w = 1.0;
    for (int k = 0; k < m; ++k) {
      r2 += G->coords[p * m + k] * G->coords[p * m + k];
      w *= G->axes[k].weights[(p / G->stride[k]) % G->axes[k].n];
      G->J[(p * m + k) * m + k] = 1.0;
    }
    // g = phi^2 delta, phi = 2 / (sqrt|c| (1 - r^2))
    const double phi = 2.0 / (std::sqrt(ac) * (1.0 - r2));
    G->weight[p] = w * std::pow(phi, m);
    for (int i = 0; i < m; ++i) {
      G->model_g[p * m * m + i * m + i] = phi * phi;
      for (int k = 0; k < m; ++k) {
        const double dphi = phi * 2.0 * G->coords[p * m + k] / (1.0 - r2);
        G->model_dg[p * m * m * m + k * m * m + i * m + i] = 2.0 * phi * dphi;
      }
    }
  }
  fill_gamma(*G);
  return G;
}

}  // namespace

int DiscreteManifold::total_dim() const {
  int n = 0;
  for (auto& f : factors) n += f->dim;
  if (spec.kind == ManifoldKind::BergerSphere) n = 3;
  return n;
}

double DiscreteManifold::volume() const {
  switch (spec.kind) {
    case ManifoldKind::RoundSphere: return sphere_volume(spec.dim, spec.curvature);
    case ManifoldKind::ProductSphere: {
      const double v = sphere_volume(spec.dim, spec.curvature);
      return v * v;
    }
    case ManifoldKind::BergerSphere: return 2.0 * M_PI * M_PI * spec.berger_t;
    case ManifoldKind::HyperbolicBall: {
      double s = 0.0;
      for (double w : factors[0]->weight) s += w;
      return s;
    }
  }
  return 0.0;
}

std::shared_ptr<const DiscreteManifold> build_manifold(const ManifoldSpec& spec) {
  if (spec.dim < 3) throw std::invalid_argument("dimension must be at least 3");
  if (spec.curvature == 0.0) throw std::invalid_argument("curvature must be nonzero");
  if (spec.kind == ManifoldKind::RoundSphere || spec.kind == ManifoldKind::ProductSphere) {
    if (spec.curvature < 0) throw std::invalid_argument("sphere requires c > 0");
  }
  if (spec.kind == ManifoldKind::HyperbolicBall && spec.curvature > 0)
    throw std::invalid_argument("hyperbolic ball requires c < 0");
  if (spec.kind == ManifoldKind::BergerSphere) {
    if (spec.dim != 3) throw std::invalid_argument("Berger sphere is three-dimensional");
    if (!(spec.berger_t > 0)) throw std::invalid_argument("berger_t must be positive");
  } else if (spec.resolution < 8) {
    throw std::invalid_argument("resolution below differentiation stencil width (8)");
  }
  if (spec.kind == ManifoldKind::RoundSphere || spec.kind == ManifoldKind::ProductSphere) {
    if (spec.resolution % 2 != 0) throw std::invalid_argument("sphere resolution must be even");
  }
  if (!(spec.support_radius > 0 && spec.support_radius < 1))
    throw std::invalid_argument("support_radius must lie in (0,1)");

  auto M = std::make_shared<DiscreteManifold>();
  M->spec = spec;
  switch (spec.kind) {
    case ManifoldKind::RoundSphere:
      M->factors.push_back(sphere_grid(spec.dim, spec.curvature, spec.resolution));
      break;
    case ManifoldKind::ProductSphere: {
      auto g = sphere_grid(spec.dim, spec.curvature, spec.resolution);
      M->factors.push_back(g);
      M->factors.push_back(g);
      break;
    }
    case ManifoldKind::HyperbolicBall:
      if (!(spec.ball_half_width > 0 && spec.ball_half_width * std::sqrt(double(spec.dim)) < 1.0))
        throw std::invalid_argument("ball chart cube must lie inside the unit ball");
      M->factors.push_back(ball_grid(spec.dim, spec.curvature, spec.resolution, spec.ball_half_width));
      break;
    case ManifoldKind::BergerSphere:
      break;  // handled algebraically
  }
  return M;
}

ManifoldSpec unit_volume(const ManifoldSpec& spec) {
  ManifoldSpec out = spec;
  if (spec.kind == ManifoldKind::RoundSphere) {
    const double v1 = sphere_volume(spec.dim, 1.0);
    out.curvature = std::pow(v1, 2.0 / spec.dim);
  } else if (spec.kind == ManifoldKind::ProductSphere) {
    const double v1 = sphere_volume(spec.dim, 1.0);
    out.curvature = std::pow(v1, 2.0 / spec.dim);  // (v1 rho^m)^2 = 1
  }
  return out;
}

}  // namespace rpstab
