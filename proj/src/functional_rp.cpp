#include "rpstab/functional_rp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rpstab {

namespace {

TensorField absR2(const ConnectionData& c, const CurvaturePack& cp) { return pointwise_inner(c, cp.R, cp.R); }

}  // namespace

FunctionalValue rp_value(const ConnectionData& c, const CurvaturePack& cp, double p) {
  if (p <= 0) throw std::invalid_argument("rp_value: p > 0 required");
  FunctionalValue v;
  v.p = p;
  auto R2 = absR2(c, cp);
  v.value = integrate(c, pointwise_map(R2, [p](double x) { return std::pow(std::max(x, 0.0), 0.5 * p); }));
  v.volume = integrate(c, constant_scalar(c.manifold, 1.0));
  if (c.manifold->num_factors() == 1) {
    auto vals = scalar_values(R2);
    v.absR_min = 1e300;
    double s = 0.0;
    for (double x : vals) {
      const double a = std::sqrt(std::max(x, 0.0));
      v.absR_min = std::min(v.absR_min, a);
      v.absR_max = std::max(v.absR_max, a);
      s += a;
    }
    v.absR_mean = s / vals.size();
  } else {
    const double a = std::sqrt(integrate(c, R2) / v.volume);
    v.absR_min = v.absR_max = v.absR_mean = a;
  }
  return v;
}

FunctionalValue rp_value(const ConnectionData& c, double p) { return rp_value(c, curvature(c), p); }

double tilde_rp(const ConnectionData& c, double p) {
  auto v = rp_value(c, p);
  return std::pow(v.volume, 2.0 * p / c.dim() - 1.0) * v.value;
}

GradientField rp_gradient(const ConnectionData& c, const CurvaturePack& cp, double p) {
  if (p < 2.0) throw std::invalid_argument("rp_gradient: p >= 2 required");
  const int n = c.dim();
  GradientField G;
  G.p = p;
  auto R2 = absR2(c, cp);
  auto Rp2 = pointwise_map(R2, [p](double x) { return std::pow(x, 0.5 * p - 1.0); });
  auto Rp = pointwise_map(R2, [p](double x) { return std::pow(x, 0.5 * p); });
  auto g = metric_field(c);
  auto a = deltaD(c, dstar(c, tensor(Rp2, cp.R)));
  auto grad = add(a, tensor(Rp2, cp.Rcheck), -p, -p);
  grad = add(grad, tensor(Rp, g), 1.0, 0.5);
  G.ambient = compact(grad);
  G.ambient.sym = Symmetry::Sym2;
  const double V = integrate(c, constant_scalar(c.manifold, 1.0));
  const double Rpint = integrate(c, Rp);
  G.constrained = compact(add(G.ambient, g, 1.0, (p / n - 0.5) * Rpint / V));
  G.constrained.sym = Symmetry::Sym2;
  return G;
}

GradientField rp_gradient(const ConnectionData& c, double p) { return rp_gradient(c, curvature(c), p); }

double rp_along(const ConnectionData& base, const TensorField& h, double t, double p, bool tilde) {
  auto c = perturbed_connection(base, h, t);
  return tilde ? tilde_rp(c, p) : rp_value(c, p).value;
}

FdEstimate fd_derivative(const std::function<double(double)>& F, int order, double step, int levels) {
  if (order != 1 && order != 2) throw std::invalid_argument("fd_derivative: order 1 or 2");
  const double F0 = order == 2 ? F(0.0) : 0.0;
  auto base = [&](double s) {
    if (order == 1) return (F(s) - F(-s)) / (2 * s);
    return (F(s) - 2 * F0 + F(-s)) / (s * s);
  };
  // Richardson table, step halves each row, error ~ s^2
  std::vector<std::vector<double>> T;
  double s = step;
  for (int i = 0; i <= levels; ++i, s *= 0.5) {
    T.push_back({base(s)});
    double f = 4.0;
    for (int j = 1; j <= i; ++j, f *= 4.0) T[i].push_back(T[i][j - 1] + (T[i][j - 1] - T[i - 1][j - 1]) / (f - 1.0));
  }
  FdEstimate e;
  e.value = T.back().back();
  e.error = levels > 0 ? std::abs(e.value - T[levels - 1].back()) : 0.0;
  return e;
}

}  // namespace rpstab
