#include "rpstab/tensor_field.hpp"
#include "rpstab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace rpstab {

std::size_t ipow(int b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(b);
  return r;
}

DenseTensor::DenseTensor(int dim_, int rank_, std::size_t nodes_)
    : dim(dim_), rank(rank_), nodes(nodes_), data(ipow(dim_, rank_) * nodes_, 0.0) {}

bool DenseTensor::is_constant(double rtol) const {
  double scale = 0.0;
  for (double v : data) scale = std::max(scale, std::abs(v));
  for (std::size_t c = 0; c < comps(); ++c) {
    const double* x = comp(c);
    for (std::size_t p = 1; p < nodes; ++p)
      if (std::abs(x[p] - x[0]) > rtol * std::max(scale, 1e-300)) return false;
  }
  return true;
}

DensePtr unit_part(const std::shared_ptr<const Grid>& g) {
  static std::mutex mu;
  static std::map<const Grid*, std::weak_ptr<const DenseTensor>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(g.get());
  if (it != cache.end())
    if (auto sp = it->second.lock()) return sp;
  auto t = std::make_shared<DenseTensor>(g->dim, 0, g->nodes);
  std::fill(t->data.begin(), t->data.end(), 1.0);
  cache[g.get()] = t;
  return t;
}

bool is_unit(const DensePtr& p, const std::shared_ptr<const Grid>& g) { return p == unit_part(g); }

int ConnectionData::dim() const {
  int n = 0;
  for (auto& f : factors) n += f->grid->dim;
  return n;
}

const DenseTensor& TensorField::dense() const {
  if (terms.size() != 1 || terms[0].parts.size() != 1 || terms[0].coef != 1.0)
    throw std::logic_error("dense() needs a compacted single-factor field");
  return *terms[0].parts[0];
}

namespace {

std::vector<int> decode(std::size_t c, int rank, int m) {
  std::vector<int> d(rank);
  for (int s = rank - 1; s >= 0; --s) {
    d[s] = static_cast<int>(c % m);
    c /= m;
  }
  return d;
}

std::size_t encode(const std::vector<int>& d, int m) {
  std::size_t c = 0;
  for (int v : d) c = c * m + v;
  return c;
}

DensePtr dense_axpby(double a, const DenseTensor& x, double b, const DenseTensor& y) {
  auto out = std::make_shared<DenseTensor>(x.dim, x.rank, x.nodes);
  const std::size_t n = x.data.size();
  for (std::size_t i = 0; i < n; ++i) out->data[i] = a * x.data[i] + b * y.data[i];
  return out;
}

DensePtr dense_permute(const DenseTensor& A, const std::vector<int>& perm) {
  auto out = std::make_shared<DenseTensor>(A.dim, A.rank, A.nodes);
  const int m = A.dim;
  for (std::size_t oc = 0; oc < out->comps(); ++oc) {
    auto d = decode(oc, A.rank, m);
    std::vector<int> y(A.rank);
    for (int s = 0; s < A.rank; ++s) y[perm[s]] = d[s];
    std::copy_n(A.comp(encode(y, m)), A.nodes, out->comp(oc));
  }
  return out;
}

DenseTensor raise_slot(const FactorMetric& fm, const DenseTensor& B, int slot) {
  DenseTensor out(B.dim, B.rank, B.nodes);
  const int m = B.dim;
  const std::size_t N = B.nodes;
  for (std::size_t oc = 0; oc < out.comps(); ++oc) {
    auto d = decode(oc, B.rank, m);
    const int a = d[slot];
    double* o = out.comp(oc);
    for (int b = 0; b < m; ++b) {
      d[slot] = b;
      const double* x = B.comp(encode(d, m));
      const double* gi = fm.ginv.data() + (a * m + b) * N;
      for (std::size_t p = 0; p < N; ++p) o[p] += gi[p] * x[p];
    }
  }
  return out;
}

DensePtr dense_contract(const FactorMetric& fm, const DenseTensor& A, int s1, int s2) {
  const int m = A.dim;
  const std::size_t N = A.nodes;
  auto out = std::make_shared<DenseTensor>(m, A.rank - 2, N);
  for (std::size_t oc = 0; oc < out->comps(); ++oc) {
    auto d = decode(oc, A.rank - 2, m);
    std::vector<int> full(A.rank);
    double* o = out->comp(oc);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        int k = 0;
        for (int s = 0; s < A.rank; ++s) {
          if (s == s1) full[s] = a;
          else if (s == s2) full[s] = b;
          else full[s] = d[k++];
        }
        const double* x = A.comp(encode(full, m));
        const double* gi = fm.ginv.data() + (a * m + b) * N;
        for (std::size_t p = 0; p < N; ++p) o[p] += gi[p] * x[p];
      }
  }
  return out;
}

// out(freeA, freeB) = sum_k A(.. k ..) B^(.. k ..), B's paired slots raised.
DensePtr dense_contract_pairs(const FactorMetric* fm, const DenseTensor& A, const DenseTensor& B,
                              const std::vector<std::pair<int, int>>& pairs) {
  const int m = A.dim;
  const std::size_t N = A.nodes;
  DenseTensor Bt = B;
  for (auto& pr : pairs) Bt = raise_slot(*fm, Bt, pr.second);
  std::vector<int> freeA, freeB;
  for (int s = 0; s < A.rank; ++s)
    if (std::none_of(pairs.begin(), pairs.end(), [s](auto& q) { return q.first == s; })) freeA.push_back(s);
  for (int s = 0; s < B.rank; ++s)
    if (std::none_of(pairs.begin(), pairs.end(), [s](auto& q) { return q.second == s; })) freeB.push_back(s);
  const int ro = static_cast<int>(freeA.size() + freeB.size());
  const int np = static_cast<int>(pairs.size());
  auto out = std::make_shared<DenseTensor>(m, ro, N);
  const std::size_t nk = ipow(m, np);
  for (std::size_t oc = 0; oc < out->comps(); ++oc) {
    auto d = decode(oc, ro, m);
    std::vector<int> ia(A.rank), ib(B.rank);
    for (std::size_t i = 0; i < freeA.size(); ++i) ia[freeA[i]] = d[i];
    for (std::size_t i = 0; i < freeB.size(); ++i) ib[freeB[i]] = d[freeA.size() + i];
    double* o = out->comp(oc);
    for (std::size_t kc = 0; kc < nk; ++kc) {
      auto k = decode(kc, np, m);
      for (int q = 0; q < np; ++q) {
        ia[pairs[q].first] = k[q];
        ib[pairs[q].second] = k[q];
      }
      const double* x = A.comp(encode(ia, m));
      const double* y = Bt.comp(encode(ib, m));
      for (std::size_t p = 0; p < N; ++p) o[p] += x[p] * y[p];
    }
  }
  return out;
}

std::vector<int> local_index(const std::vector<int>& layout) {
  std::vector<int> loc(layout.size());
  std::map<int, int> cnt;
  for (std::size_t s = 0; s < layout.size(); ++s) loc[s] = cnt[layout[s]]++;
  return loc;
}

void check_same(const TensorField& a, const TensorField& b) {
  if (a.manifold != b.manifold) throw std::invalid_argument("fields live on different manifolds");
}

const FactorMetric& factor_metric(const ConnectionData& c, int f) { return *c.factors[f]; }

}  // namespace

TensorField zero_field(std::shared_ptr<const DiscreteManifold> m, int rank) { return TensorField(std::move(m), rank); }

TensorField from_dense(std::shared_ptr<const DiscreteManifold> m, DenseTensor t, Symmetry s) {
  if (m->num_factors() != 1) throw std::invalid_argument("from_dense expects a single-factor manifold");
  TensorField f(m, t.rank);
  f.sym = s;
  Term term;
  term.layout.assign(t.rank, 0);
  term.parts.push_back(std::make_shared<DenseTensor>(std::move(t)));
  f.terms.push_back(std::move(term));
  return f;
}

TensorField constant_scalar(std::shared_ptr<const DiscreteManifold> m, double v) {
  TensorField f(m, 0);
  Term t;
  t.coef = v;
  for (auto& g : m->factors) t.parts.push_back(unit_part(g));
  f.terms.push_back(t);
  return f;
}

TensorField factor_scalar(std::shared_ptr<const DiscreteManifold> m, int factor, DenseTensor fv) {
  TensorField f(m, 0);
  Term t;
  for (int k = 0; k < m->num_factors(); ++k)
    t.parts.push_back(k == factor ? std::make_shared<DenseTensor>(fv) : unit_part(m->factors[k]));
  f.terms.push_back(t);
  return f;
}

TensorField lift(std::shared_ptr<const DiscreteManifold> prod, int factor, const TensorField& a) {
  TensorField f(prod, a.rank);
  f.sym = a.sym;
  for (auto& ta : a.terms) {
    Term t;
    t.coef = ta.coef;
    t.layout.assign(a.rank, factor);
    for (int k = 0; k < prod->num_factors(); ++k)
      t.parts.push_back(k == factor ? ta.parts[0] : unit_part(prod->factors[k]));
    f.terms.push_back(t);
  }
  return f;
}

TensorField metric_field(const ConnectionData& c) {
  TensorField f(c.manifold, 2);
  f.sym = Symmetry::Sym2;
  for (int k = 0; k < static_cast<int>(c.factors.size()); ++k) {
    Term t;
    t.layout = {k, k};
    for (int j = 0; j < static_cast<int>(c.factors.size()); ++j)
      t.parts.push_back(j == k ? c.factors[k]->g : unit_part(c.factors[j]->grid));
    f.terms.push_back(t);
  }
  return f;
}

TensorField compact(const TensorField& a) {
  TensorField out(a.manifold, a.rank);
  out.sym = a.sym;
  std::vector<Term> terms;
  for (auto& t : a.terms)
    if (t.coef != 0.0) terms.push_back(t);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < terms.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < terms.size() && !changed; ++j) {
        if (terms[i].layout != terms[j].layout) continue;
        int diff = -1, ndiff = 0;
        for (std::size_t f = 0; f < terms[i].parts.size(); ++f)
          if (terms[i].parts[f] != terms[j].parts[f]) {
            diff = static_cast<int>(f);
            ++ndiff;
          }
        if (ndiff > 1) continue;
        Term merged = terms[i];
        if (ndiff == 0) {
          merged.coef = terms[i].coef + terms[j].coef;
        } else {
          merged.coef = 1.0;
          merged.parts[diff] = dense_axpby(terms[i].coef, *terms[i].parts[diff], terms[j].coef, *terms[j].parts[diff]);
        }
        terms[i] = merged;
        terms.erase(terms.begin() + j);
        changed = true;
      }
  }
  // single-factor fields carry coef 1 so dense() is always available
  for (auto& t : terms)
    if (t.parts.size() == 1 && t.coef != 1.0) {
      t.parts[0] = dense_axpby(t.coef, *t.parts[0], 0.0, *t.parts[0]);
      t.coef = 1.0;
    }
  out.terms = std::move(terms);
  if (out.terms.empty() && a.manifold->num_factors() == 1) {
    auto g = a.manifold->factors[0];
    Term t;
    t.layout.assign(a.rank, 0);
    t.parts.push_back(std::make_shared<DenseTensor>(g->dim, a.rank, g->nodes));
    out.terms.push_back(t);
  }
  return out;
}

TensorField add(const TensorField& a, const TensorField& b, double alpha, double beta) {
  check_same(a, b);
  if (a.rank != b.rank) throw std::invalid_argument("add: rank mismatch");
  TensorField out(a.manifold, a.rank);
  out.sym = a.sym == b.sym ? a.sym : Symmetry::None;
  for (auto t : a.terms) {
    t.coef *= alpha;
    out.terms.push_back(t);
  }
  for (auto t : b.terms) {
    t.coef *= beta;
    out.terms.push_back(t);
  }
  return compact(out);
}

TensorField scale(const TensorField& a, double s) {
  TensorField out = a;
  for (auto& t : out.terms) t.coef *= s;
  return compact(out);
}

TensorField permute(const TensorField& a, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != a.rank) throw std::invalid_argument("permute: bad permutation");
  TensorField out(a.manifold, a.rank);
  for (auto& t : a.terms) {
    Term nt;
    nt.coef = t.coef;
    nt.layout.resize(a.rank);
    for (int s = 0; s < a.rank; ++s) nt.layout[s] = t.layout[perm[s]];
    const auto loc_in = local_index(t.layout);
    for (std::size_t f = 0; f < t.parts.size(); ++f) {
      std::vector<int> lp;
      for (int s = 0; s < a.rank; ++s)
        if (nt.layout[s] == static_cast<int>(f)) lp.push_back(loc_in[perm[s]]);
      bool ident = true;
      for (std::size_t j = 0; j < lp.size(); ++j) ident = ident && lp[j] == static_cast<int>(j);
      nt.parts.push_back(ident ? t.parts[f] : dense_permute(*t.parts[f], lp));
    }
    out.terms.push_back(nt);
  }
  return compact(out);
}

TensorField symmetrize2(const TensorField& a) {
  auto s = add(a, permute(a, {1, 0}), 0.5, 0.5);
  s.sym = Symmetry::Sym2;
  return s;
}

TensorField contract(const ConnectionData& c, const TensorField& a, int s1, int s2) {
  if (s1 == s2 || s1 >= a.rank || s2 >= a.rank) throw std::invalid_argument("contract: bad slots");
  TensorField out(a.manifold, a.rank - 2);
  for (auto& t : a.terms) {
    const int f = t.layout[s1];
    if (t.layout[s2] != f) continue;
    const auto loc = local_index(t.layout);
    Term nt;
    nt.coef = t.coef;
    for (int s = 0; s < a.rank; ++s)
      if (s != s1 && s != s2) nt.layout.push_back(t.layout[s]);
    nt.parts = t.parts;
    nt.parts[f] = dense_contract(factor_metric(c, f), *t.parts[f], loc[s1], loc[s2]);
    out.terms.push_back(nt);
  }
  return compact(out);
}

namespace {
TensorField contract_pairs_impl(const ConnectionData* c, const TensorField& a, const TensorField& b,
                                const std::vector<std::pair<int, int>>& pairs) {
  check_same(a, b);
  const int nf = a.manifold->num_factors();
  std::vector<int> freeA, freeB;
  for (int s = 0; s < a.rank; ++s)
    if (std::none_of(pairs.begin(), pairs.end(), [s](auto& q) { return q.first == s; })) freeA.push_back(s);
  for (int s = 0; s < b.rank; ++s)
    if (std::none_of(pairs.begin(), pairs.end(), [s](auto& q) { return q.second == s; })) freeB.push_back(s);
  TensorField out(a.manifold, static_cast<int>(freeA.size() + freeB.size()));
  for (auto& ta : a.terms)
    for (auto& tb : b.terms) {
      bool ok = true;
      for (auto& pr : pairs) ok = ok && ta.layout[pr.first] == tb.layout[pr.second];
      if (!ok) continue;
      const auto la = local_index(ta.layout), lb = local_index(tb.layout);
      Term nt;
      nt.coef = ta.coef * tb.coef;
      for (int s : freeA) nt.layout.push_back(ta.layout[s]);
      for (int s : freeB) nt.layout.push_back(tb.layout[s]);
      for (int f = 0; f < nf; ++f) {
        std::vector<std::pair<int, int>> lp;
        for (auto& pr : pairs)
          if (ta.layout[pr.first] == f) lp.emplace_back(la[pr.first], lb[pr.second]);
        const DenseTensor& A = *ta.parts[f];
        const DenseTensor& B = *tb.parts[f];
        const auto& grid = a.manifold->factors[f];
        if (is_unit(tb.parts[f], grid)) {
          nt.parts.push_back(ta.parts[f]);
        } else if (is_unit(ta.parts[f], grid)) {
          nt.parts.push_back(tb.parts[f]);
        } else {
          nt.parts.push_back(dense_contract_pairs(c ? c->factors[f].get() : nullptr, A, B, lp));
        }
      }
      out.terms.push_back(nt);
    }
  return compact(out);
}
}  // namespace

TensorField contract_pairs(const ConnectionData& c, const TensorField& a, const TensorField& b,
                           const std::vector<std::pair<int, int>>& pairs) {
  return contract_pairs_impl(&c, a, b, pairs);
}

TensorField tensor(const TensorField& a, const TensorField& b) { return contract_pairs_impl(nullptr, a, b, {}); }

TensorField pointwise_inner(const ConnectionData& c, const TensorField& a, const TensorField& b) {
  if (a.rank != b.rank) throw std::invalid_argument("pointwise_inner: valence mismatch");
  std::vector<std::pair<int, int>> pairs;
  for (int s = 0; s < a.rank; ++s) pairs.emplace_back(s, s);
  return contract_pairs(c, a, b, pairs);
}

namespace {
double integrate_impl(const ConnectionData* c, const TensorField& f) {
  if (f.rank != 0) throw std::invalid_argument("integrate: scalar field expected");
  if (c && c->manifold != f.manifold) throw std::invalid_argument("integrate: mismatched manifold handle");
  std::vector<double> vals;
  for (auto& t : f.terms) {
    double prod = t.coef;
    for (std::size_t k = 0; k < t.parts.size(); ++k) {
      const auto& G = *f.manifold->factors[k];
      const DenseTensor& P = *t.parts[k];
      std::vector<double> w(G.nodes);
      for (std::size_t p = 0; p < G.nodes; ++p)
        w[p] = G.weight[p] * P.data[p] * (c ? c->factors[k]->ratio[p] : 1.0);
      prod *= pairwise_sum(w);
    }
    vals.push_back(prod);
  }
  return pairwise_sum(vals);
}
}  // namespace

double integrate(const ConnectionData& c, const TensorField& f) { return integrate_impl(&c, f); }
double integrate(const TensorField& f) { return integrate_impl(nullptr, f); }

double l2_inner(const ConnectionData& c, const TensorField& a, const TensorField& b) {
  return integrate(c, pointwise_inner(c, a, b));
}

double l2_norm(const ConnectionData& c, const TensorField& a) { return std::sqrt(std::max(0.0, l2_inner(c, a, a))); }

TensorField pointwise_map(const TensorField& f, const std::function<double(double)>& fn) {
  if (f.rank != 0) throw std::invalid_argument("pointwise_map: scalar field expected");
  if (f.manifold->num_factors() == 1) {
    auto c = compact(f);
    const DenseTensor& d = c.dense();
    DenseTensor out(d.dim, 0, d.nodes);
    for (std::size_t p = 0; p < d.nodes; ++p) out.data[p] = fn(d.data[p]);
    return from_dense(f.manifold, std::move(out));
  }
  double v = 0.0;
  for (auto& t : f.terms) {
    double prod = t.coef;
    for (auto& part : t.parts) {
      if (!part->is_constant(1e-6))
        throw std::invalid_argument("pointwise_map on a product requires a homogeneous (constant) field");
      double mean = 0.0;
      for (double x : part->data) mean += x;
      prod *= mean / part->data.size();
    }
    v += prod;
  }
  return constant_scalar(f.manifold, fn(v));
}

std::vector<double> scalar_values(const TensorField& f) {
  if (f.rank != 0 || f.manifold->num_factors() != 1) throw std::invalid_argument("scalar_values: single-factor scalar expected");
  return compact(f).dense().data;
}

double max_abs(const TensorField& f) {
  if (f.manifold->num_factors() != 1) throw std::invalid_argument("max_abs: single-factor field expected");
  double mx = 0.0;
  for (auto& t : f.terms)
    for (double v : t.parts[0]->data) mx = std::max(mx, std::abs(t.coef * v));
  if (f.terms.size() > 1) {
    auto c = compact(f);
    mx = 0.0;
    for (double v : c.dense().data) mx = std::max(mx, std::abs(v));
  }
  return mx;
}

double component(const TensorField& f, const std::vector<int>& idx, const std::vector<std::size_t>& nodes) {
  double v = 0.0;
  for (auto& t : f.terms) {
    std::vector<std::vector<int>> local(t.parts.size());
    bool ok = true;
    for (int s = 0; s < f.rank; ++s) {
      int fac = 0, li = idx[s];
      while (li >= f.manifold->factors[fac]->dim) {
        li -= f.manifold->factors[fac]->dim;
        ++fac;
      }
      if (fac != t.layout[s]) {
        ok = false;
        break;
      }
      local[fac].push_back(li);
    }
    if (!ok) continue;
    double prod = t.coef;
    for (std::size_t k = 0; k < t.parts.size(); ++k) {
      const DenseTensor& P = *t.parts[k];
      prod *= P.comp(encode(local[k], P.dim))[nodes[k]];
    }
    v += prod;
  }
  return v;
}

double symmetry_defect(const ConnectionData& c, const TensorField& f, Symmetry s) {
  std::vector<TensorField> diffs;
  if (s == Symmetry::Sym2) {
    diffs.push_back(add(f, permute(f, {1, 0}), 1.0, -1.0));
  } else if (s == Symmetry::RiemannType) {
    diffs.push_back(add(f, permute(f, {1, 0, 2, 3}), 1.0, 1.0));
    diffs.push_back(add(f, permute(f, {0, 1, 3, 2}), 1.0, 1.0));
    diffs.push_back(add(f, permute(f, {2, 3, 0, 1}), 1.0, -1.0));
  }
  double mx = 0.0;
  for (auto& d : diffs)
    mx = std::max(mx, f.manifold->num_factors() == 1 ? max_abs(d) : l2_norm(c, d));
  return mx;
}

}  // namespace rpstab
