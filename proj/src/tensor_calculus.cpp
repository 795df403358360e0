#include "rpstab/tensor_calculus.hpp"
#include "rpstab/parallel.hpp"
#include "rpstab/variation_decomposition.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

namespace rpstab {

namespace {

int g_deltaD_sign = 1;

std::shared_ptr<const FactorMetric> build_factor(std::shared_ptr<const Grid> grid, DensePtr g) {
  const int m = grid->dim;
  const std::size_t N = grid->nodes;
  auto fm = std::make_shared<FactorMetric>();
  fm->grid = grid;
  fm->g = g;
  fm->ginv.assign(m * m * N, 0.0);
  fm->gamma.assign(m * m * m * N, 0.0);
  fm->ratio.assign(N, 1.0);

  bool singular = false;
  parallel_for(N, [&](std::size_t p) {
    Eigen::MatrixXd G(m, m), G0(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        G(i, j) = g->comp(i * m + j)[p];
        G0(i, j) = grid->model_g[p * m * m + i * m + j];
      }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
      singular = true;
      return;
    }
    const Eigen::MatrixXd Gi = llt.solve(Eigen::MatrixXd::Identity(m, m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) fm->ginv[(i * m + j) * N + p] = 0.5 * (Gi(i, j) + Gi(j, i));
    fm->ratio[p] = std::sqrt(G.determinant() / G0.determinant());
  });
  if (singular) throw SingularMetric("metric is not positive definite at some node");

  // d_k g_ij
  std::vector<double> dg(m * m * m * N);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double* out = &dg[((k * m + i) * m + j) * N];
        grid->diff(k, g->comp(i * m + j), out);
        if (j != i) std::copy_n(out, N, &dg[((k * m + j) * m + i) * N]);
      }
  auto D = [&](int k, int i, int j, std::size_t p) { return dg[((k * m + i) * m + j) * N + p]; };
  parallel_for(N, [&](std::size_t p) {
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a)
        for (int i = a; i < m; ++i) {
          double s = 0.0;
          for (int e = 0; e < m; ++e)
            s += fm->ginv[(b * m + e) * N + p] * (D(a, i, e, p) + D(i, a, e, p) - D(e, a, i, p));
          fm->gamma[((b * m + a) * m + i) * N + p] = 0.5 * s;
          fm->gamma[((b * m + i) * m + a) * N + p] = 0.5 * s;
        }
  });
  return fm;
}

DensePtr dense_cov_deriv(const FactorMetric& fm, const DenseTensor& A) {
  const Grid& G = *fm.grid;
  const int m = A.dim, r = A.rank;
  const std::size_t N = A.nodes, nc = A.comps();
  auto out = std::make_shared<DenseTensor>(m, r + 1, N);
  for (int a = 0; a < m; ++a)
    for (std::size_t c = 0; c < nc; ++c) G.diff(a, A.comp(c), out->comp(a * nc + c));
  if (r == 0) return out;
  std::vector<std::size_t> pw(r);
  for (int s = 0; s < r; ++s) pw[s] = ipow(m, r - 1 - s);
  for (int a = 0; a < m; ++a)
    for (std::size_t c = 0; c < nc; ++c) {
      double* o = out->comp(a * nc + c);
      for (int s = 0; s < r; ++s) {
        const int is = static_cast<int>((c / pw[s]) % m);
        for (int b = 0; b < m; ++b) {
          const std::size_t cb = c + (static_cast<std::size_t>(b) - is) * pw[s];
          const double* x = A.comp(cb);
          const double* gam = fm.gamma.data() + ((b * m + a) * m + is) * N;
          for (std::size_t p = 0; p < N; ++p) o[p] -= gam[p] * x[p];
        }
      }
    }
  return out;
}

DensePtr dense_curvature(const FactorMetric& fm) {
  const Grid& G = *fm.grid;
  const DenseTensor& g = *fm.g;
  const int m = G.dim;
  const std::size_t N = G.nodes;
  // first and second partials of g_ij (i <= j stored, symmetric access)
  auto sym = [m](int i, int j) { return i <= j ? i * m + j : j * m + i; };
  std::vector<double> d1(m * m * m * N), d2(m * m * m * m * N);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double* dk = &d1[(k * m * m + sym(i, j)) * N];
        G.diff(k, g.comp(i * m + j), dk);
        for (int l = k; l < m; ++l) {
          double* out = &d2[((k * m + l) * m * m + sym(i, j)) * N];
          if (l == k) G.diff(k, g.comp(i * m + j), out, 2);
          else G.diff(l, dk, out);
        }
      }
  auto P1 = [&](int k, int i, int j, std::size_t p) { return d1[(k * m * m + sym(i, j)) * N + p]; };
  auto P2 = [&](int k, int l, int i, int j, std::size_t p) {
    if (l < k) std::swap(k, l);
    return d2[((k * m + l) * m * m + sym(i, j)) * N + p];
  };
  auto R = std::make_shared<DenseTensor>(m, 4, N);
  parallel_for(N, [&](std::size_t p) {
    std::vector<double> low(m * m * m);  // Gamma_{e,bc}
    for (int e = 0; e < m; ++e)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          low[(e * m + b) * m + c] = 0.5 * (P1(b, c, e, p) + P1(c, b, e, p) - P1(e, b, c, p));
    auto up = [&](int f, int a, int d) { return fm.gamma[((f * m + a) * m + d) * N + p]; };
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) {
            double v = 0.5 * (P2(b, c, a, d, p) + P2(a, d, b, c, p) - P2(b, d, a, c, p) - P2(a, c, b, d, p));
            for (int f = 0; f < m; ++f)
              v += low[(f * m + b) * m + c] * up(f, a, d) - low[(f * m + b) * m + d] * up(f, a, c);
            R->comp(((a * m + b) * m + c) * m + d)[p] = v;
          }
  });
  return R;
}

}  // namespace

ConnectionData christoffel(const TensorField& metric) {
  ConnectionData c;
  c.manifold = metric.manifold;
  const int nf = metric.manifold->num_factors();
  for (int f = 0; f < nf; ++f) {
    const auto& grid = metric.manifold->factors[f];
    auto gf = std::make_shared<DenseTensor>(grid->dim, 2, grid->nodes);
    for (auto& t : metric.terms) {
      if (t.layout[0] != f || t.layout[1] != f) {
        if (t.layout[0] != t.layout[1]) throw std::invalid_argument("christoffel: metric must be block diagonal");
        continue;
      }
      double coef = t.coef;
      for (int k = 0; k < nf; ++k) {
        if (k == f) continue;
        if (!t.parts[k]->is_constant(1e-13)) throw std::invalid_argument("christoffel: non-product metric");
        coef *= t.parts[k]->data[0];
      }
      for (std::size_t i = 0; i < gf->data.size(); ++i) gf->data[i] += coef * t.parts[f]->data[i];
    }
    c.factors.push_back(build_factor(grid, gf));
  }
  return c;
}

ConnectionData model_connection(std::shared_ptr<const DiscreteManifold> m) {
  ConnectionData c;
  c.manifold = m;
  for (auto& grid : m->factors) {
    auto g = std::make_shared<DenseTensor>(grid->dim, 2, grid->nodes);
    const int d = grid->dim;
    for (std::size_t p = 0; p < grid->nodes; ++p)
      for (int i = 0; i < d * d; ++i) g->comp(i)[p] = grid->model_g[p * d * d + i];
    c.factors.push_back(build_factor(grid, g));
  }
  return c;
}

ConnectionData perturbed_connection(const ConnectionData& base, const TensorField& h, double t) {
  if (base.manifold->num_factors() != 1)
    throw std::invalid_argument("perturbed metrics are supported on single-factor manifolds only");
  const DenseTensor& hd = compact(h).dense();
  auto g = std::make_shared<DenseTensor>(*base.factors[0]->g);
  for (std::size_t i = 0; i < g->data.size(); ++i) g->data[i] += t * hd.data[i];
  ConnectionData c;
  c.manifold = base.manifold;
  c.perturbed = true;
  c.factors.push_back(build_factor(base.factors[0]->grid, g));
  return c;
}

std::shared_ptr<const DiscreteManifold> factor_manifold(std::shared_ptr<const DiscreteManifold> prod, int k) {
  static std::mutex mu;
  static std::map<std::pair<const DiscreteManifold*, int>, std::weak_ptr<const DiscreteManifold>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_pair(prod.get(), k);
  if (auto it = cache.find(key); it != cache.end())
    if (auto sp = it->second.lock()) return sp;
  auto m = std::make_shared<DiscreteManifold>();
  m->spec = prod->spec;
  m->spec.kind = prod->factors[k]->kind;
  m->factors.push_back(prod->factors[k]);
  cache[key] = m;
  return m;
}

ConnectionData factor_connection(const ConnectionData& c, int k) {
  ConnectionData f;
  f.manifold = factor_manifold(c.manifold, k);
  f.factors.push_back(c.factors[k]);
  f.perturbed = c.perturbed;
  return f;
}

double christoffel_closed_form_defect(const ConnectionData& c) {
  double mx = 0.0, scale = 0.0;
  for (auto& fm : c.factors) {
    const Grid& G = *fm->grid;
    const int m = G.dim;
    const std::size_t N = G.nodes;
    for (std::size_t p = 0; p < N; ++p)
      for (int b = 0; b < m * m * m; ++b) {
        const double ref = G.model_gamma[p * m * m * m + b];
        mx = std::max(mx, std::abs(fm->gamma[b * N + p] - ref));
        scale = std::max(scale, std::abs(ref));
      }
  }
  return mx / std::max(scale, 1e-300);
}

TensorField cov_deriv(const ConnectionData& c, const TensorField& T) {
  TensorField out(T.manifold, T.rank + 1);
  const int nf = T.manifold->num_factors();
  for (auto& t : T.terms)
    for (int f = 0; f < nf; ++f) {
      if (is_unit(t.parts[f], T.manifold->factors[f])) continue;
      Term nt;
      nt.coef = t.coef;
      nt.layout.push_back(f);
      nt.layout.insert(nt.layout.end(), t.layout.begin(), t.layout.end());
      nt.parts = t.parts;
      nt.parts[f] = dense_cov_deriv(*c.factors[f], *t.parts[f]);
      out.terms.push_back(nt);
    }
  return compact(out);
}

TensorField dstar(const ConnectionData& c, const TensorField& T) { return scale(contract(c, cov_deriv(c, T), 0, 1), -1.0); }

TensorField rough_laplacian(const ConnectionData& c, const TensorField& T) { return dstar(c, cov_deriv(c, T)); }

TensorField div(const ConnectionData& c, const TensorField& h) {
  if (h.rank != 2) throw std::invalid_argument("div: sym2 expected");
  return dstar(c, h);
}

TensorField div_star(const ConnectionData& c, const TensorField& w) {
  if (w.rank != 1) throw std::invalid_argument("div_star: one-form expected");
  return symmetrize2(cov_deriv(c, w));
}

TensorField dD(const ConnectionData& c, const TensorField& a) {
  if (a.rank != 2) throw std::invalid_argument("dD: sym2 expected");
  auto Da = cov_deriv(c, a);
  return add(permute(Da, {1, 0, 2}), permute(Da, {1, 2, 0}), 1.0, -1.0);
}

TensorField deltaD_signed(const ConnectionData& c, const TensorField& A, int sign) {
  if (A.rank != 3) throw std::invalid_argument("deltaD: (0,3) tensor expected");
  auto t = contract(c, cov_deriv(c, A), 0, 3);
  auto s = add(t, permute(t, {1, 0}), sign, sign);
  s.sym = Symmetry::Sym2;
  return s;
}

TensorField deltaD(const ConnectionData& c, const TensorField& A) { return deltaD_signed(c, A, g_deltaD_sign); }

TensorField laplace(const ConnectionData& c, const TensorField& f) {
  if (f.rank != 0) throw std::invalid_argument("laplace: scalar expected");
  return scale(contract(c, hess(c, f), 0, 1), -1.0);
}

TensorField ext_d(const ConnectionData& c, const TensorField& w) {
  if (w.rank == 0) return cov_deriv(c, w);
  if (w.rank != 1) throw std::invalid_argument("ext_d: function or one-form expected");
  auto Dw = cov_deriv(c, w);
  return add(Dw, permute(Dw, {1, 0}), 1.0, -1.0);
}

TensorField ext_delta(const ConnectionData& c, const TensorField& b) {
  if (b.rank != 1 && b.rank != 2) throw std::invalid_argument("ext_delta: one- or two-form expected");
  return dstar(c, b);
}

TensorField compose(const ConnectionData& c, const TensorField& h, const TensorField& k) {
  auto s = add(contract_pairs(c, h, k, {{1, 0}}), contract_pairs(c, k, h, {{1, 0}}), 0.5, 0.5);
  s.sym = Symmetry::Sym2;
  return s;
}

TensorField trace(const ConnectionData& c, const TensorField& h) { return contract(c, h, 0, 1); }

TensorField hess(const ConnectionData& c, const TensorField& f) { return cov_deriv(c, cov_deriv(c, f)); }

TensorField curvature_tensor(const ConnectionData& c) {
  TensorField R(c.manifold, 4);
  R.sym = Symmetry::RiemannType;
  const int nf = c.manifold->num_factors();
  for (int f = 0; f < nf; ++f) {
    Term t;
    t.layout.assign(4, f);
    for (int k = 0; k < nf; ++k) t.parts.push_back(k == f ? dense_curvature(*c.factors[f]) : unit_part(c.manifold->factors[k]));
    R.terms.push_back(t);
  }
  return R;
}

CurvaturePack curvature_from(const ConnectionData& c, TensorField R) {
  CurvaturePack cp;
  cp.R = std::move(R);
  cp.R.sym = Symmetry::RiemannType;
  cp.ric = contract(c, cp.R, 1, 3);
  cp.ric.sym = Symmetry::Sym2;
  cp.scal = contract(c, cp.ric, 0, 1);
  cp.Rcheck = contract_pairs(c, cp.R, cp.R, {{1, 1}, {2, 2}, {3, 3}});
  cp.Rcheck.sym = Symmetry::Sym2;
  return cp;
}

CurvaturePack curvature(const ConnectionData& c) { return curvature_from(c, curvature_tensor(c)); }

int deltaD_sign() { return g_deltaD_sign; }
void set_deltaD_sign(int s) { g_deltaD_sign = s >= 0 ? 1 : -1; }

SignCalibration calibrate_deltaD(const ConnectionData& c, unsigned seed) {
  auto h = bump_sym2(c, seed);
  auto A0 = bump_tensor(c, 3, seed + 101);
  auto A = add(A0, permute(A0, {0, 2, 1}), 0.5, -0.5);
  const double lhs = l2_inner(c, dD(c, h), A);
  const double rp = l2_inner(c, h, deltaD_signed(c, A, +1));
  const double rm = l2_inner(c, h, deltaD_signed(c, A, -1));
  SignCalibration cal;
  const double den = std::abs(lhs) + 1e-300;
  cal.defect_plus = std::abs(lhs - rp) / den;
  cal.defect_minus = std::abs(lhs - rm) / den;
  cal.sign = cal.defect_plus <= cal.defect_minus ? 1 : -1;
  set_deltaD_sign(cal.sign);
  return cal;
}

}  // namespace rpstab
