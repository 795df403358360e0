#include "rpstab/variation_decomposition.hpp"
#include "rpstab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace rpstab {

namespace {

struct Blob {
  std::vector<double> center;  // unit ambient direction (sphere) or chart point (ball)
  std::vector<double> slope;
  std::vector<double> tensor;  // ambient coefficient tensor, E^rank entries
};

const Grid& single_grid(const ConnectionData& c) {
  if (c.manifold->num_factors() != 1) throw std::invalid_argument("generator expects a single-factor manifold");
  return *c.manifold->factors[0];
}

Blob make_blob(const Grid& G, int rank, bool symmetric, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const int E = G.ambient;
  Blob b;
  b.center.resize(E);
  b.slope.resize(E);
  if (G.kind == ManifoldKind::HyperbolicBall) {
    for (auto& v : b.center) v = 0.05 * G.radius * nd(rng);
  } else {
    double n2 = 0.0;
    for (auto& v : b.center) {
      v = nd(rng);
      n2 += v * v;
    }
    for (auto& v : b.center) v /= std::sqrt(n2);
  }
  for (auto& v : b.slope) v = 0.5 * nd(rng);
  const std::size_t nt = ipow(E, rank);
  b.tensor.resize(nt);
  for (auto& v : b.tensor) v = nd(rng);
  if (symmetric && rank == 2) {
    for (int i = 0; i < E; ++i)
      for (int j = 0; j < i; ++j) b.tensor[j * E + i] = b.tensor[i * E + j];
  }
  return b;
}

double envelope(const Grid& G, const Blob& b, std::size_t p) {
  const int E = G.ambient;
  const double* X = &G.X[p * E];
  if (G.kind == ManifoldKind::HyperbolicBall) {
    const double sigma = 0.24 * G.radius;
    double d2 = 0.0, lin = 1.0;
    for (int a = 0; a < E; ++a) {
      d2 += (X[a] - b.center[a]) * (X[a] - b.center[a]);
      lin += b.slope[a] * X[a] / G.radius;
    }
    return std::exp(-d2 / (sigma * sigma)) * lin;
  }
  const double kappa = 1.5;
  double dot = 0.0, lin = 1.0;
  for (int a = 0; a < E; ++a) {
    dot += X[a] * b.center[a] / G.radius;
    lin += b.slope[a] * X[a] / G.radius;
  }
  return std::exp(kappa * (dot - 1.0)) * lin;
}

// T_{i1..ik} = sum_blobs env * S_{A1..Ak} J_{A1 i1} ... J_{Ak ik}
DenseTensor pullback_blobs(const Grid& G, int rank, const std::vector<Blob>& blobs) {
  const int m = G.dim, E = G.ambient;
  const std::size_t N = G.nodes;
  DenseTensor T(m, rank, N);
  const std::size_t nc = T.comps(), na = ipow(E, rank);
  parallel_for(N, [&](std::size_t p) {
    const double* J = &G.J[p * E * m];
    for (auto& b : blobs) {
      const double env = envelope(G, b, p);
      // contract ambient slots one at a time: cur has shape (mixed) m^s E^(rank-s)
      std::vector<double> cur(b.tensor.begin(), b.tensor.end()), nxt;
      for (int s = 0; s < rank; ++s) {
        const std::size_t tail = ipow(E, rank - s - 1), head = ipow(m, s);
        nxt.assign(head * m * tail, 0.0);
        for (std::size_t h = 0; h < head; ++h)
          for (int A = 0; A < E; ++A)
            for (int i = 0; i < m; ++i) {
              const double j = J[A * m + i];
              if (j == 0.0) continue;
              for (std::size_t t = 0; t < tail; ++t)
                nxt[(h * m + i) * tail + t] += j * cur[(h * E + A) * tail + t];
            }
        cur.swap(nxt);
      }
      (void)na;
      for (std::size_t c = 0; c < nc; ++c) T.comp(c)[p] += env * cur[c];
    }
  });
  return T;
}

TensorField make_bump(const ConnectionData& c, int rank, bool sym, unsigned seed) {
  const Grid& G = single_grid(c);
  std::mt19937_64 rng(seed * 7919ULL + static_cast<unsigned>(rank) * 104729ULL + 17ULL);
  std::vector<Blob> blobs;
  for (int q = 0; q < 2; ++q) blobs.push_back(make_blob(G, rank, sym, rng));
  auto f = from_dense(c.manifold, pullback_blobs(G, rank, blobs), sym && rank == 2 ? Symmetry::Sym2 : Symmetry::None);
  return f;
}

double cutoff(double s) { return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s * s)); }

double support_coordinate(const Grid& G, std::size_t p) {
  if (G.kind == ManifoldKind::HyperbolicBall) return G.dist_from_center(p) / G.radius;
  return std::acos(std::clamp(G.X[p * G.ambient] / G.radius, -1.0, 1.0)) / M_PI;
}

}  // namespace

TensorField bump_scalar(const ConnectionData& c, unsigned seed) { return make_bump(c, 0, false, seed); }
TensorField bump_one_form(const ConnectionData& c, unsigned seed) { return make_bump(c, 1, false, seed); }
TensorField bump_sym2(const ConnectionData& c, unsigned seed) { return make_bump(c, 2, true, seed); }
TensorField bump_tensor(const ConnectionData& c, int rank, unsigned seed) { return make_bump(c, rank, false, seed); }

TensorField bump(const ConnectionData& c, const TensorField& field, double radius) {
  const Grid& G = single_grid(c);
  DenseTensor psi(G.dim, 0, G.nodes);
  for (std::size_t p = 0; p < G.nodes; ++p) psi.data[p] = cutoff(support_coordinate(G, p) / radius);
  auto out = tensor(from_dense(c.manifold, std::move(psi)), field);
  out.sym = field.sym;
  return out;
}

double support_leak(const TensorField& field, double radius) {
  const auto cf = compact(field);
  const DenseTensor& d = cf.dense();
  const Grid& G = *field.manifold->factors[0];
  double in = 0.0, out = 0.0;
  for (std::size_t cc = 0; cc < d.comps(); ++cc)
    for (std::size_t p = 0; p < d.nodes; ++p) {
      const double v = std::abs(d.comp(cc)[p]);
      if (support_coordinate(G, p) >= radius) out = std::max(out, v);
      else in = std::max(in, v);
    }
  return out / std::max(in, 1e-300);
}

DenseTensor harmonic_values(const Grid& G, int l, int a, int b) {
  if (G.kind != ManifoldKind::RoundSphere) throw std::invalid_argument("harmonics live on round spheres");
  if (l < 1 || a == b || a >= G.ambient || b >= G.ambient) throw std::invalid_argument("bad harmonic index");
  DenseTensor f(G.dim, 0, G.nodes);
  for (std::size_t p = 0; p < G.nodes; ++p) {
    std::complex<double> z(G.X[p * G.ambient + a] / G.radius, G.X[p * G.ambient + b] / G.radius);
    f.data[p] = std::pow(z, l).real();
  }
  return f;
}

TensorField sphere_harmonic(std::shared_ptr<const DiscreteManifold> m, int l, int a, int b, int factor) {
  if (m->num_factors() == 1) return from_dense(m, harmonic_values(*m->factors[0], l, a, b));
  return factor_scalar(m, factor, harmonic_values(*m->factors[factor], l, a, b));
}

SplitVariation tt_project(const ConnectionData& c, const TensorField& h, double tol, int max_iter) {
  // f is eliminated exactly: h_tt = h° - (delta^* w)°, so tr h_tt = 0 pointwise and
  // delta h_tt = 0 becomes delta (delta^* w)° = delta h°. The discrete delta and
  // delta^* are adjoint only up to discretisation error, so restarted GMRES
  // rather than CG.
  const int n = c.dim();
  auto g = metric_field(c);
  auto traceless = [&](const TensorField& k) { return add(k, tensor(trace(c, k), g), 1.0, -1.0 / n); };
  // right preconditioner: pointwise 1/(1 + sum_i g^ii), tames the chart poles
  std::vector<double> sc;
  if (c.manifold->num_factors() == 1) {
    const auto& fm = *c.factors[0];
    const std::size_t nn = fm.grid->nodes;
    sc.resize(nn);
    for (std::size_t x = 0; x < nn; ++x) {
      double t = 0.0;
      for (int i = 0; i < n; ++i) t += fm.ginv[(i * n + i) * nn + x];
      sc[x] = 1.0 / (1.0 + t);
    }
  }
  auto P = [&](const TensorField& w) {
    if (sc.empty()) return w;
    TensorField o = w;
    for (auto& t : o.terms) {
      auto d = std::make_shared<DenseTensor>(*t.parts[0]);
      for (std::size_t k = 0; k < d->comps(); ++k) {
        double* q = d->comp(k);
        for (std::size_t x = 0; x < sc.size(); ++x) q[x] *= sc[x];
      }
      t.parts[0] = d;
    }
    return o;
  };
  auto L = [&](const TensorField& w) { return compact(div(c, traceless(div_star(c, w)))); };
  auto dot = [&](const TensorField& a, const TensorField& b) { return l2_inner(c, a, b); };
  if (max_iter < 0) {
    std::size_t nodes = 0;
    for (auto& grid : c.manifold->factors) nodes += grid->nodes;
    max_iter = static_cast<int>(std::min<std::size_t>(10 * nodes, 1u << 30));
  }
  const auto h0 = traceless(h);
  const auto b = compact(div(c, h0));
  const double bn = std::sqrt(std::max(dot(b, b), 0.0));
  SplitVariation out;
  TensorField x = scale(b, 0.0);
  if (bn == 0.0) out.converged = true;
  const int restart = 80;
  int it = 0;
  double cycle_start = 1.0;
  bool stagnated = false;
  while (!out.converged && !stagnated && it < max_iter) {
    auto r = add(b, L(P(x)), 1.0, -1.0);
    double beta = std::sqrt(std::max(dot(r, r), 0.0));
    if (beta / bn <= tol) {
      out.converged = true;
      break;
    }
    std::vector<TensorField> V{scale(r, 1.0 / beta)};
    std::vector<std::vector<double>> H;
    std::vector<double> cs, sn, e{beta};
    int j = 0;
    for (; j < restart && it < max_iter; ++j, ++it) {
      auto w = L(P(V[j]));
      std::vector<double> hj(j + 2, 0.0);
      for (int i = 0; i <= j; ++i) {
        hj[i] = dot(w, V[i]);
        w = add(w, V[i], 1.0, -hj[i]);
      }
      hj[j + 1] = std::sqrt(std::max(dot(w, w), 0.0));
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * hj[i] + sn[i] * hj[i + 1];
        hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
        hj[i] = t;
      }
      const double den = std::hypot(hj[j], hj[j + 1]);
      cs.push_back(den > 0 ? hj[j] / den : 1.0);
      sn.push_back(den > 0 ? hj[j + 1] / den : 0.0);
      const double hnext = hj[j + 1];
      hj[j] = den;
      hj[j + 1] = 0.0;
      e.push_back(-sn[j] * e[j]);
      e[j] *= cs[j];
      H.push_back(hj);
      const double res = std::abs(e[j + 1]) / bn;
      out.residual_history.push_back(res);
      out.iterations = it + 1;
      if (res <= tol || hnext == 0.0) {
        ++j;
        ++it;
        break;
      }
      V.push_back(scale(w, 1.0 / hnext));
    }
    // back substitution
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = e[i];
      for (int k = i + 1; k < j; ++k) s -= H[k][i] * y[k];
      y[i] = s / H[i][i];
    }
    for (int i = 0; i < j; ++i) x = add(x, V[i], 1.0, y[i]);
    x = compact(x);
    const double now = out.residual_history.empty() ? 1.0 : out.residual_history.back();
    stagnated = now > 0.99 * cycle_start;  // discretisation floor reached
    cycle_start = now;
  }
  x = P(x);
  if (!out.converged) {
    auto r = add(b, L(x), 1.0, -1.0);
    out.converged = std::sqrt(std::max(dot(r, r), 0.0)) / bn <= tol;
  }
  auto dsw = div_star(c, x);
  out.omega = x;
  out.f = scale(add(trace(c, h), trace(c, dsw), 1.0, -1.0), 1.0 / n);
  out.h_tt = compact(add(h0, traceless(dsw), 1.0, -1.0));
  out.h_tt.sym = Symmetry::Sym2;
  const double nh = l2_norm(c, h);
  auto re = add(h, add(add(out.h_tt, dsw), tensor(out.f, g)), 1.0, -1.0);
  out.reassembly_error = nh > 0 ? l2_norm(c, re) / nh : 0.0;
  out.stagnated = stagnated && !out.converged;
  if (!out.converged && !out.stagnated)
    throw std::runtime_error("tt_project: iteration budget spent, last residual " +
                             std::to_string(out.residual_history.empty() ? 1.0 : out.residual_history.back()));
  return out;
}

TTSample tt_generator(const ConnectionData& c, unsigned seed, double tol) {
  TTSample s;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto h0 = bump_sym2(c, seed + attempt);
    auto sp = tt_project(c, h0, tol);
    if (l2_norm(c, sp.h_tt) > 1e-6 * l2_norm(c, h0)) {
      s.h = sp.h_tt;
      s.seed_used = seed + attempt;
      s.retries = attempt;
      return s;
    }
  }
  throw std::runtime_error("tt_generator: degenerate output for 16 consecutive seeds");
}

TensorField factor_metric_field(const ConnectionData& c, int factor) {
  auto g = metric_field(c);
  TensorField out(c.manifold, 2);
  out.sym = Symmetry::Sym2;
  for (auto& t : g.terms)
    if (t.layout[0] == factor) out.terms.push_back(t);
  return out;
}

ProductSplit product_split(const ConnectionData& c, const TensorField& h) {
  if (c.manifold->num_factors() != 2) throw std::invalid_argument("product_split: product manifold expected");
  const int m = c.manifold->factors[0]->dim;
  TensorField b11(c.manifold, 2), b22(c.manifold, 2), mixed(c.manifold, 2);
  for (auto& t : h.terms) {
    if (t.layout[0] == 0 && t.layout[1] == 0) b11.terms.push_back(t);
    else if (t.layout[0] == 1 && t.layout[1] == 1) b22.terms.push_back(t);
    else mixed.terms.push_back(t);
  }
  auto tr1 = trace(c, b11), tr2 = trace(c, b22);
  const double hn = std::max(l2_norm(c, h), 1e-300);
  ProductSplit s;
  s.trace_defect = l2_norm(c, add(tr1, tr2)) / hn;
  if (s.trace_defect > 1e-8) throw std::invalid_argument("product_split: h must be trace-free");
  s.f = add(tr1, tr2, 0.5 / m, -0.5 / m);
  s.h1 = add(b11, tensor(s.f, factor_metric_field(c, 0)), 1.0, -1.0);
  s.h2 = add(b22, tensor(s.f, factor_metric_field(c, 1)), 1.0, 1.0);
  s.h_mixed = compact(mixed);
  s.h1.sym = s.h2.sym = s.h_mixed.sym = Symmetry::Sym2;
  return s;
}

ProductSplit product_sample(const ConnectionData& c, unsigned seed) {
  if (c.manifold->num_factors() != 2) throw std::invalid_argument("product_sample: product manifold expected");
  auto M = c.manifold;
  ConnectionData fc[2] = {factor_connection(c, 0), factor_connection(c, 1)};
  auto traceless = [](const ConnectionData& fcon, const TensorField& b) {
    const int m = fcon.dim();
    return add(b, tensor(trace(fcon, b), metric_field(fcon)), 1.0, -1.0 / m);
  };
  ProductSplit s;
  for (int k = 0; k < 2; ++k) {
    // tangent to factor k and a function on that factor only
    auto hk = lift(M, k, traceless(fc[k], bump_sym2(fc[k], seed + 11 * k)));
    hk.sym = Symmetry::Sym2;
    (k == 0 ? s.h1 : s.h2) = hk;
  }
  auto a = lift(M, 0, bump_one_form(fc[0], seed + 4));
  auto b = lift(M, 1, bump_one_form(fc[1], seed + 5));
  auto ab = tensor(a, b);
  s.h_mixed = compact(add(ab, permute(ab, {1, 0})));
  s.h_mixed.sym = Symmetry::Sym2;
  s.f = compact(tensor(lift(M, 0, bump_scalar(fc[0], seed + 6)), lift(M, 1, bump_scalar(fc[1], seed + 7))));
  return s;
}

TensorField product_assemble(const ConnectionData& c, const ProductSplit& s) {
  auto fg = add(tensor(s.f, factor_metric_field(c, 0)), tensor(s.f, factor_metric_field(c, 1)), 1.0, -1.0);
  auto h = add(add(s.h1, s.h2), add(s.h_mixed, fg));
  h.sym = Symmetry::Sym2;
  return h;
}

}  // namespace rpstab
