#include "rpstab/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "rpstab/functional_rp.hpp"
#include "rpstab/hessian_engine.hpp"
#include "rpstab/stability_report.hpp"
#include "rpstab/variation_decomposition.hpp"
#include "rpstab/variation_ops.hpp"

namespace rpstab {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
  Report& r;
  std::string name;
  Clock::time_point t0 = Clock::now();
  ~Timer() { r.timing.emplace_back(name, std::chrono::duration<double>(Clock::now() - t0).count()); }
};

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string pstr(double p) { return "p=" + fmt(p); }

double rel(double a, double b) {
  const double den = std::max(std::abs(a), std::abs(b));
  return den > 0.0 ? std::abs(a - b) / den : 0.0;
}

// floor the denominator at `scale`; first harmonics have H = 0 exactly
double rel_floor(double a, double b, double scale) {
  const double den = std::max({std::abs(a), std::abs(b), scale});
  return den > 0.0 ? std::abs(a - b) / den : 0.0;
}

struct Built {
  std::string label;
  GeometryConfig geo;
  std::shared_ptr<const DiscreteManifold> M;
  ConnectionData c;
};

ManifoldSpec to_spec(const GeometryConfig& g, int res) {
  ManifoldSpec s;
  s.dim = g.dim;
  s.curvature = g.curvature;
  s.resolution = res;
  if (g.kind == "sphere") {
    if (g.curvature <= 0) throw ConfigError("sphere needs curvature > 0");
    s.kind = ManifoldKind::RoundSphere;
  } else if (g.kind == "hyperbolic") {
    if (g.curvature >= 0) throw ConfigError("hyperbolic needs curvature < 0");
    s.kind = ManifoldKind::HyperbolicBall;
  } else if (g.kind == "product_sphere") {
    if (g.curvature <= 0) throw ConfigError("product_sphere needs curvature > 0");
    s.kind = ManifoldKind::ProductSphere;
  } else {
    throw ConfigError("geometry " + g.kind + " has no discrete model; only stability-report accepts it");
  }
  return s;
}

std::string label_of(const GeometryConfig& g, int res, bool unit_vol) {
  std::string s;
  if (g.kind == "sphere") s = "S^" + std::to_string(g.dim);
  if (g.kind == "hyperbolic") s = "H^" + std::to_string(g.dim) + " ball";
  if (g.kind == "product_sphere") s = "S^" + std::to_string(g.dim) + "xS^" + std::to_string(g.dim);
  if (unit_vol)
    s += "(V=1,N=" + std::to_string(res) + ")";
  else
    s += "(c=" + fmt(g.curvature) + ",N=" + std::to_string(res) + ")";
  return s;
}

int default_resolution(const std::string& kind, int sphere_default) {
  if (kind == "hyperbolic") return 40;
  if (kind == "product_sphere") return 16;
  return sphere_default;
}

Built build(const RunConfig& cfg, const GeometryConfig& g, int sphere_default, bool unit_vol) {
  const int res = g.resolution ? *g.resolution : (cfg.resolution ? *cfg.resolution : default_resolution(g.kind, sphere_default));
  auto spec = to_spec(g, res);
  if (unit_vol) spec = unit_volume(spec);
  Built b;
  b.geo = g;
  b.label = label_of(g, res, unit_vol);
  b.M = build_manifold(spec);
  b.c = model_connection(b.M);
  return b;
}

void calibrate(Report& r, const Built& b, unsigned seed) {
  auto base = b.M->num_factors() == 1 ? b.c : factor_connection(b.c, 0);
  r.calibration.push_back({b.label, calibrate_deltaD(base, seed)});
}

void calibrate_default(Report& r, unsigned seed) {
  GeometryConfig g;
  RunConfig cfg;
  g.resolution = 12;
  calibrate(r, build(cfg, g, 12, false), seed);
}

std::vector<GeometryConfig> geometries_or(const RunConfig& cfg, std::vector<GeometryConfig> defaults) {
  return cfg.geometries.empty() ? defaults : cfg.geometries;
}

GeometryConfig geo(const std::string& kind, int dim, double curv, std::optional<int> res = std::nullopt) {
  GeometryConfig g;
  g.kind = kind;
  g.dim = dim;
  g.curvature = curv;
  g.resolution = res;
  return g;
}

TensorField sym_outer(const TensorField& a, const TensorField& b) {
  auto t = tensor(a, b);
  auto s = compact(add(t, permute(t, {1, 0})));
  s.sym = Symmetry::Sym2;
  return s;
}

struct Harm {
  int l, a, b;
};

// ---------------------------------------------------------------- identity-check

void identity_check(Report& r, const RunConfig& cfg) {
  const std::string anchor_sf = "constant-curvature first-variation identity: ";
  const std::string anchor_pr = "product first-variation identity: ";
  for (auto& g :
       geometries_or(cfg, {geo("sphere", 3, 1.0), geo("hyperbolic", 3, -1.0), geo("product_sphere", 3, 1.0, 32)})) {
    auto b = build(cfg, g, 32, false);
    Timer t{r, "identity-check " + b.label};
    calibrate(r, b, cfg.seed);
    auto cp = curvature(b.c);
    const double p = cfg.p.empty() ? 2.0 : cfg.p.front();
    if (b.M->num_factors() == 1) {
      auto ids = space_form_identities();
      std::vector<double> worst(ids.size(), 0.0);
      double one_form = 0.0, bochner = 0.0;
      for (int k = 0; k < cfg.variations; ++k) {
        auto h = bump_sym2(b.c, cfg.seed + k);
        auto probe = bump_sym2(b.c, cfg.seed + 1000 + k);
        for (std::size_t i = 0; i < ids.size(); ++i)
          worst[i] = std::max(worst[i], check_space_form_identity(b.c, cp, h, ids[i], p, &probe).rel_l2);
        one_form = std::max(one_form, check_one_form_identity(b.c, bump_one_form(b.c, cfg.seed + 2000 + k)).rel_l2);
        bochner = std::max(bochner, check_bochner(b.c, bump_scalar(b.c, cfg.seed + 3000 + k)).rel_l2);
      }
      for (std::size_t i = 0; i < ids.size(); ++i)
        r.check_le(b.label + " " + identity_name(ids[i]), anchor_sf + identity_name(ids[i]), worst[i], cfg.tol_analytic);
      r.check_le(b.label + " 2 delta delta^* w + delta d w = 2 D*D w", "one-form Weitzenbock identity", one_form,
                 cfg.tol_analytic);
      r.check_le(b.label + " Bochner", "Bochner formula on gradients", bochner, cfg.tol_analytic);
    } else {
      auto names = product_identity_names();
      std::vector<double> worst(names.size(), 0.0);
      for (int k = 0; k < cfg.variations; ++k) {
        auto s = product_sample(b.c, cfg.seed + k);
        auto probe = product_sample(b.c, cfg.seed + 1000 + k);
        for (std::size_t i = 0; i < names.size(); ++i)
          worst[i] = std::max(worst[i], check_product_identity(b.c, cp, names[i], s, probe, p).rel_l2);
      }
      for (std::size_t i = 0; i < names.size(); ++i)
        r.check_le(b.label + " " + names[i], anchor_pr + names[i], worst[i], cfg.tol_analytic);
    }
  }
}

// ---------------------------------------------------------------- critical-check

void critical_check(Report& r, const RunConfig& cfg) {
  for (auto& g : geometries_or(cfg, {geo("sphere", 3, 1.0), geo("sphere", 4, 1.0, 16), geo("product_sphere", 3, 1.0)})) {
    if (g.kind == "hyperbolic") throw ConfigError("critical-check needs a closed manifold");
    auto b = build(cfg, g, 24, true);
    Timer t{r, "critical-check " + b.label};
    calibrate(r, b, cfg.seed);
    auto cp = curvature(b.c);
    const int n = b.M->total_dim();
    std::vector<double> ps = cfg.p;
    if (ps.empty()) {
      ps = {2.0, 2.5, 3.0, 0.5 * n, double(n)};
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
      ps.erase(std::remove_if(ps.begin(), ps.end(), [](double p) { return p < 2.0; }), ps.end());
    }
    for (double p : ps) {
      auto fv = rp_value(b.c, cp, p);
      auto grad = rp_gradient(b.c, cp, p);
      r.check_le(b.label + " " + pstr(p) + " |grad R_p restricted| / R_p", "round metrics are critical for R_p",
                 l2_norm(b.c, grad.constrained) / fv.value, cfg.tol_analytic);
      const double tr = integrate(b.c, trace(b.c, grad.ambient));
      r.check_le(b.label + " " + pstr(p) + " trace identity", "int tr grad R_p = (n/2 - p) R_p",
                 std::abs(tr - (0.5 * n - p) * fv.value) / fv.value, cfg.tol_analytic);
    }
  }
}

// ---------------------------------------------------------------- hessian-compare

void hessian_compare_sphere(Report& r, const RunConfig& cfg, const Built& b) {
  auto cp = curvature(b.c);
  const int n = b.M->total_dim();
  const double k = model_curvature(b.c);
  std::vector<double> ps = cfg.p.empty() ? std::vector<double>{2.0, 3.0} : cfg.p;
  std::vector<TensorField> tts;
  {
    Timer t{r, "hessian-compare TT fields " + b.label};
    for (int i = 0; i < cfg.variations; ++i) tts.push_back(smooth_tt(b.c, int(cfg.seed) + i));
  }
  const int nconf = std::max(3, std::min(cfg.variations, 5));
  std::vector<TensorField> fs;
  for (int i = 0; i < nconf; ++i) fs.push_back(smooth_conformal_f(b.c, i));  // index 0 is a first harmonic
  auto g = metric_field(b.c);
  for (double p : ps) {
    Timer t{r, "hessian-compare " + b.label + " " + pstr(p)};
    const double P = std::pow(2.0 * n * (n - 1) * k * k, 0.5 * p - 1.0);
    double min_q = 1e300;
    for (std::size_t i = 0; i < tts.size(); ++i) {
      const auto& A = tts[i];
      const std::string nm = b.label + " " + pstr(p) + " TT[" + std::to_string(i) + "]";
      auto gen = hessian_general(b.c, cp, A, A, p);
      auto cl = closed_tt(b.c, A, p, 1e-6);
      auto fd = fd_oracle(b.c, A, p, cfg.fd_step, 2);
      r.check_le(nm + " closed vs general", "TT Hessian closed form", rel(cl.value, gen.value), cfg.tol_analytic);
      r.check_le(nm + " general vs FD", "second variation of normalized R_p", rel(gen.value, fd.value), cfg.tol_fd);
      r.check_le(nm + " closed vs FD", "TT Hessian closed form vs second variation", rel(cl.value, fd.value), cfg.tol_fd);
      min_q = std::min(min_q, gen.value / l2_inner(b.c, A, A));
    }
    r.check_gt(b.label + " " + pstr(p) + " min TT Rayleigh quotient minus 2nc^2 p|R|^{p-2}",
               "TT stability margin H(h,h) > 2nc^2 ||h||^2 (times p|R|^{p-2})", min_q - 2.0 * n * k * k * p * P, 0.0);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      auto h = compact(tensor(fs[i], g));
      h.sym = Symmetry::Sym2;
      const std::string nm = b.label + " " + pstr(p) + " conformal[" + std::to_string(i) + "]";
      auto gen = hessian_general(b.c, cp, h, h, p);
      auto cl = hessian_conformal(b.c, fs[i], p);
      auto fd = fd_oracle(b.c, h, p, cfg.fd_step, 2);
      const double f2 = l2_inner(b.c, fs[i], fs[i]);
      const double unit = p * P * k * k * f2;
      r.check_le(nm + " closed vs general", "conformal Hessian quadratic form", rel_floor(cl.value, gen.value, unit),
                 cfg.tol_analytic);
      r.check_le(nm + " general vs FD", "second variation of normalized R_p", rel_floor(gen.value, fd.value, unit),
                 cfg.tol_fd);
      r.check_le(nm + " closed vs FD", "conformal Hessian vs second variation", rel_floor(cl.value, fd.value, unit),
                 cfg.tol_fd);
      // spectral prediction p|R|^{p-2} c^2 q(mu/c) ||f||^2
      auto lap = laplace(b.c, fs[i]);
      const double mu = l2_inner(b.c, lap, fs[i]) / f2;
      const double pred = p * P * k * k * conformal_coeffs(n, to_rational(p)).q(mu / k) * f2;
      if (std::abs(mu / k - n) < 1e-6)
        r.check_le(nm + " first-harmonic |H(fg,fg)|/||f||^2", "equality case: first harmonics are degenerate",
                   std::abs(gen.value) / f2, cfg.tol_analytic);
      else
        r.check_le(nm + " H(fg,fg) vs p|R|^{p-2} c^2 q(mu) ||f||^2", "conformal spectrum", rel(gen.value, pred), 1e-4);
      if (i < tts.size()) {
        auto x = hessian_general(b.c, cp, tts[i], h, p);
        r.check_le(nm + " |H(h_tt, fg)| / (|h_tt||fg|)", "TT and conformal blocks decouple",
                   std::abs(x.value) / (l2_norm(b.c, tts[i]) * l2_norm(b.c, h)), cfg.tol_analytic);
      }
    }
  }
}

ProductSplit smooth_product_split(const ConnectionData& c, int index) {
  auto M = c.manifold;
  ConnectionData fc[2] = {factor_connection(c, 0), factor_connection(c, 1)};
  ProductSplit s;
  s.h1 = lift(M, 0, smooth_tt(fc[0], index));
  s.h2 = lift(M, 1, smooth_tt(fc[1], index + 1));
  s.h1.sym = s.h2.sym = Symmetry::Sym2;
  auto coclosed = [&](int f, int i) {
    const int amb = M->factors[f]->ambient;
    auto Y1 = from_dense(fc[f].manifold, harmonic_values(*M->factors[f], 1, i % amb, (i + 1) % amb));
    auto Y2 = from_dense(fc[f].manifold, harmonic_values(*M->factors[f], 2, (i + 1) % amb, (i + 2) % amb));
    auto t = tensor(ext_d(fc[f], Y1), ext_d(fc[f], Y2));
    return lift(M, f, ext_delta(fc[f], add(t, permute(t, {1, 0}), 0.5, -0.5)));
  };
  s.h_mixed = sym_outer(coclosed(0, index), coclosed(1, index + 2));
  s.f = compact(tensor(sphere_harmonic(M, 1 + index % 2, 0, 1, 0), sphere_harmonic(M, 2, 1, 2, 1)));
  return s;
}

void hessian_compare_product(Report& r, const RunConfig& cfg, const Built& b) {
  auto cp = curvature(b.c);
  std::vector<double> ps = cfg.p.empty() ? std::vector<double>{2.0} : cfg.p;
  auto g1 = factor_metric_field(b.c, 0), g2 = factor_metric_field(b.c, 1);
  const int nsplit = std::min(cfg.variations, 3);
  for (double p : ps)
    for (int i = 0; i < nsplit; ++i) {
      Timer t{r, "hessian-compare " + b.label + " " + pstr(p) + " split " + std::to_string(i)};
      auto s = smooth_product_split(b.c, int(cfg.seed) + i);
      const std::string nm = b.label + " " + pstr(p) + " split[" + std::to_string(i) + "]";
      auto cross = [&](const TensorField& x, const TensorField& y, const std::string& what) {
        auto v = hessian_general(b.c, cp, x, y, p).value;
        r.check_le(nm + " |H(" + what + ")| scaled", "product blocks decouple",
                   std::abs(v) / (l2_norm(b.c, x) * l2_norm(b.c, y)), cfg.tol_analytic);
      };
      cross(s.h1, s.h2, "h1,h2");
      cross(s.h1, s.h_mixed, "h1,h~");
      cross(s.h2, s.h_mixed, "h2,h~");
      auto fg1 = compact(tensor(s.f, g1)), fg2 = compact(tensor(s.f, g2));
      fg1.sym = fg2.sym = Symmetry::Sym2;
      auto fm = compact(add(fg1, fg2, 1, -1)), fp = compact(add(fg1, fg2));
      fm.sym = fp.sym = Symmetry::Sym2;
      struct B {
        ProductBlock block;
        TensorField x, y;
      };
      std::vector<B> blocks = {{ProductBlock::H1H1, s.h1, s.h1},     {ProductBlock::H2H2, s.h2, s.h2},
                               {ProductBlock::MixedMixed, s.h_mixed, s.h_mixed},
                               {ProductBlock::Fg1Fg1, fg1, fg1},     {ProductBlock::Fg1Fg2, fg1, fg2},
                               {ProductBlock::Fg2Fg2, fg2, fg2},     {ProductBlock::ConfMinus, fm, fm},
                               {ProductBlock::ConfPlus, fp, fp}};
      for (auto& bl : blocks) {
        auto gen = hessian_general(b.c, cp, bl.x, bl.y, p);
        auto cl = product_closed(b.c, bl.block, s, p);
        r.check_le(nm + " " + block_name(bl.block) + " closed vs general", "product Hessian block " + block_name(bl.block),
                   rel(cl.value, gen.value), cfg.tol_analytic);
      }
    }
}

void hessian_compare(Report& r, const RunConfig& cfg) {
  for (auto& g : geometries_or(cfg, {geo("sphere", 3, 1.0)})) {
    if (g.kind == "sphere") {
      auto b = build(cfg, g, 24, true);  // FD oracle differentiates the normalized functional
      calibrate(r, b, cfg.seed);
      hessian_compare_sphere(r, cfg, b);
    } else if (g.kind == "product_sphere") {
      auto b = build(cfg, g, 16, false);
      calibrate(r, b, cfg.seed);
      hessian_compare_product(r, cfg, b);
    } else {
      throw ConfigError("hessian-compare supports sphere and product_sphere");
    }
  }
}

// ---------------------------------------------------------------- stability-report

GeometryKind stability_kind(const std::string& k) {
  if (k == "sphere") return GeometryKind::SphereForm;
  if (k == "hyperbolic") return GeometryKind::Hyperbolic;
  if (k == "product_sphere") return GeometryKind::ProductSphere;
  if (k == "product_hyperbolic") return GeometryKind::ProductHyperbolic;
  if (k == "sphere_x_hyperbolic") return GeometryKind::SphereTimesHyperbolic;
  throw ConfigError("unknown geometry kind: " + k);
}

void stability_report(Report& r, const RunConfig& cfg) {
  calibrate_default(r, cfg.seed);
  std::vector<GeometryConfig> grid;
  if (cfg.geometries.empty()) {
    for (int n : {3, 4, 5}) grid.push_back(geo("sphere", n, 1.0));
    for (int n : {3, 4, 5}) grid.push_back(geo("hyperbolic", n, -1.0));
    for (int m : {3, 4, 5}) grid.push_back(geo("product_sphere", m, 1.0));
    for (int m : {3, 4, 5}) grid.push_back(geo("product_hyperbolic", m, -1.0));
    grid.push_back(geo("sphere_x_hyperbolic", 3, 1.0));
  } else {
    grid = cfg.geometries;
  }
  std::vector<double> ps = cfg.p.empty() ? std::vector<double>{2.0, 2.5, 3.0, 4.0, 6.0} : cfg.p;
  auto rows = nlohmann::ordered_json::array();
  for (auto& g : grid) {
    GeometryDesc d{stability_kind(g.kind), g.dim, g.curvature};
    const std::string gl = geometry_name(d.kind) + " n=" + std::to_string(d.total_dim());
    for (double p : ps) {
      auto v = verdict(d, p);
      const std::string nm = gl + " " + pstr(p) + " " + verdict_name(v.verdict);
      nlohmann::ordered_json row = {{"geometry", geometry_name(d.kind)},
                                    {"n", d.total_dim()},
                                    {"curvature", d.curvature},
                                    {"p", p},
                                    {"theorem_claims_stable", v.theorem_claims_stable},
                                    {"verdict", verdict_name(v.verdict)}};
      auto ev = nlohmann::ordered_json::array();
      for (auto& e : v.evidence)
        ev.push_back({{"name", e.name}, {"value", e.value}, {"strict", e.claimed_positive}, {"holds", e.holds}});
      row["evidence"] = ev;
      if (d.kind == GeometryKind::Hyperbolic) row["lambda1_threshold"] = v.lambda1_threshold;
      if (!v.note.empty()) row["note"] = v.note;
      rows.push_back(row);
      switch (v.verdict) {
        case Verdict::StrictlyStable: {
          double mn = 1e300;
          for (auto& e : v.evidence) mn = std::min(mn, e.value);
          r.records.push_back({nm, "stability theorem row: " + geometry_name(d.kind), mn, 0.0, Status::Pass});
          break;
        }
        case Verdict::FlaggedDiscrepancy:
          for (auto& e : v.evidence)
            if (!e.holds) r.flag(nm + ": " + e.name, "stability theorem row: " + geometry_name(d.kind), e.value);
          break;
        case Verdict::ConditionalOnLambda1:
          r.info(nm + " lambda1 threshold", "hyperbolic first-eigenvalue condition", v.lambda1_threshold);
          break;
        case Verdict::OutsideTheoremRange:
          r.info(nm, "outside the theorem's p range", 0.0);
          break;
      }
      if (d.kind == GeometryKind::Hyperbolic) {
        const bool nonpos = v.lambda1_threshold <= 0.0, in_range = 2.0 * p >= d.total_dim();
        r.check_le(gl + " " + pstr(p) + " threshold <= 0 iff p >= n/2", "first-eigenvalue threshold consistency",
                   nonpos == in_range ? 0.0 : 1.0, 0.0);
      }
    }
  }
  r.data["verdicts"] = rows;
  if (cfg.margin) {
    auto b = build(cfg, geo("sphere", 3, 1.0), 24, false);
    Timer t{r, "stability-report margin " + b.label};
    auto cp = curvature(b.c);
    std::vector<TensorField> set;
    for (int i = 0; i < cfg.variations; ++i) set.push_back(smooth_tt(b.c, int(cfg.seed) + i));
    // p = 2, n = 3, c = 1: 2nc^2 p |R|^0 = 12
    const double m = margin_estimate(b.c, cp, 2.0, set);
    r.check_gt(b.label + " p=2 min TT Rayleigh quotient", "TT stability margin above 2nc^2 p|R|^{p-2}", m, 12.0);
  }
}

// ---------------------------------------------------------------- berger-scan

void berger(Report& r, const RunConfig& cfg) {
  calibrate_default(r, cfg.seed);
  std::vector<double> ps = cfg.p.empty() ? std::vector<double>{2.0} : cfg.p;
  Timer t{r, "berger-scan"};
  {
    auto b1 = berger_curvature(1.0);
    double dk = 0.0;
    for (double K : b1.sectional) dk = std::max(dk, std::abs(K - 1.0));
    r.check_le("Berger t=1 sectional curvatures - 1", "round S^3 at t=1", dk, 1e-12);
    r.check_le("Berger t=1 |R|^2 - 12", "round S^3 at t=1", std::abs(b1.absR2 - 12.0), 1e-12);
  }
  auto curves = nlohmann::ordered_json::array();
  const double t_o = 2.0 / std::sqrt(11.0);
  for (double p : ps) {
    auto curve = berger_scan(p, cfg.t_min, cfg.t_max, cfg.t_samples, 0.1 * cfg.t_tol);
    double kz = 0.0;
    for (std::size_t i = 0; i < curve.t.size(); ++i)
      kz = std::max(kz, rel(curve.value[i], berger_tilde_rp_closed(curve.t[i], p)));
    r.check_le("Berger " + pstr(p) + " Koszul vs closed |R|^2", "Berger curvature closed form", kz, 1e-10);
    const double round = std::pow(12.0, 0.5 * p) * std::pow(2.0 * M_PI * M_PI, 2.0 * p / 3.0);
    r.check_le("Berger " + pstr(p) + " R~_p(1) vs round value", "Berger family passes through the round metric",
               rel(berger_tilde_rp(1.0, p), round), 1e-8);
    const BergerCritical* mx = nullptr;
    for (auto& c : curve.critical)
      if (c.maximum && c.t < 1.0 && (!mx || c.t < mx->t)) mx = &c;
    if (mx) {
      r.check_le("Berger " + pstr(p) + " |t_o - 2/sqrt(11)|", "interior maximum of the Berger curve (derived root)",
                 std::abs(mx->t - t_o), 1e-6);
      r.info("Berger " + pstr(p) + " t_o", "interior maximum of the Berger curve", mx->t);
    } else {
      r.check_le("Berger " + pstr(p) + " interior maximum found", "interior maximum of the Berger curve", 1.0, 0.0);
    }
    // R~_p -> 0 as t -> 0: increasing in t on (0, 0.1]
    const int K = 1000;
    double worst = 1e300;
    for (int i = 1; i < K; ++i) {
      const double a = 0.1 * i / K, bb = 0.1 * (i + 1) / K;
      worst = std::min(worst, berger_tilde_rp(bb, p) - berger_tilde_rp(a, p));
    }
    r.check_gt("Berger " + pstr(p) + " min step of R~_p on (0, 0.1]", "R~_p(t) -> 0 monotonically as t -> 0", worst, 0.0);
    r.info("Berger " + pstr(p) + " R~_p(1e-6)", "R~_p(t) -> 0 as t -> 0", berger_tilde_rp(1e-6, p));
    const double d2 = berger_dt(1.0, p, 2);
    r.check_gt("Berger " + pstr(p) + " d^2 R~_p/dt^2 at t=1", "t=1 is a strict local minimum", d2, 0.0);
    r.info("Berger " + pstr(p) + " d^2 R~_p/dt^2 at t=1 / (2 pi^2)^{2p/3}", "t=1 is a strict local minimum",
           d2 / std::pow(2.0 * M_PI * M_PI, 2.0 * p / 3.0));
    nlohmann::ordered_json cj = {{"p", p}, {"t", curve.t}, {"value", curve.value}};
    auto crit = nlohmann::ordered_json::array();
    for (auto& c : curve.critical)
      crit.push_back({{"t", c.t}, {"second_derivative", c.second_derivative}, {"maximum", c.maximum}});
    cj["critical"] = crit;
    curves.push_back(cj);
  }
  r.data["berger_curves"] = curves;
}

// ---------------------------------------------------------------- decompose

void decompose(Report& r, const RunConfig& cfg) {
  for (auto& g : geometries_or(cfg, {geo("sphere", 3, 1.0)})) {
    if (g.kind != "sphere") throw ConfigError("decompose supports sphere geometries");
    auto b = build(cfg, g, 24, false);
    calibrate(r, b, cfg.seed);
    auto rows = nlohmann::ordered_json::array();
    for (int k = 0; k < cfg.variations; ++k) {
      Timer t{r, "decompose " + b.label + " " + std::to_string(k)};
      auto h = bump_sym2(b.c, cfg.seed + k);
      auto sp = tt_project(b.c, h, 1e-10);
      auto d = tt_defect(b.c, sp.h_tt);
      const std::string nm = b.label + " seed " + std::to_string(cfg.seed + k);
      r.check_le(nm + " reassembly", "TT + Lie derivative + conformal splitting", sp.reassembly_error, cfg.tol_analytic);
      r.check_le(nm + " |div h_tt|/|h_tt|", "TT part is divergence free", d.div, cfg.tol_analytic);
      r.check_le(nm + " |tr h_tt|/|h_tt|", "TT part is trace free", d.trace, cfg.tol_analytic);
      r.info(nm + " iterations", "TT projection solver", sp.iterations);
      rows.push_back({{"seed", cfg.seed + k},
                      {"iterations", sp.iterations},
                      {"converged", sp.converged},
                      {"stagnated", sp.stagnated},
                      {"residual_history", sp.residual_history}});
    }
    r.data["decompose " + b.label] = rows;
  }
}

}  // namespace

TensorField smooth_tt(const ConnectionData& c, int index, double tol) {
  auto M = c.manifold;
  const int amb = M->factors[0]->ambient;
  static const std::array<std::array<Harm, 2>, 6> table = {{{{{2, 0, 1}, {2, 1, 2}}},
                                                            {{{2, 0, 1}, {2, 2, 3}}},
                                                            {{{2, 0, 2}, {2, 1, 3}}},
                                                            {{{2, 1, 2}, {2, 0, 3}}},
                                                            {{{2, 0, 3}, {2, 1, 3}}},
                                                            {{{2, 0, 2}, {3, 2, 3}}}}};
  const auto& e = table[std::size_t(index) % table.size()];
  auto Y = [&](const Harm& h) {
    return from_dense(M, harmonic_values(*M->factors[0], h.l, h.a % amb, h.b % amb == h.a % amb ? (h.b + 1) % amb : h.b % amb));
  };
  auto x = sym_outer(ext_d(c, Y(e[0])), ext_d(c, Y(e[1])));
  auto sp = tt_project(c, x, tol);
  return scale(sp.h_tt, 1.0 / l2_norm(c, sp.h_tt));
}

TensorField smooth_conformal_f(const ConnectionData& c, int index) {
  static const std::array<Harm, 6> table = {{{1, 0, 1}, {2, 0, 1}, {2, 1, 2}, {3, 0, 2}, {1, 1, 3}, {2, 0, 3}}};
  const auto& e = table[std::size_t(index) % table.size()];
  const int amb = c.manifold->factors[0]->ambient;
  return from_dense(c.manifold, harmonic_values(*c.manifold->factors[0], e.l, e.a % amb, e.b % amb));
}

std::vector<std::string> suite_names() {
  return {"identity-check", "critical-check", "hessian-compare", "stability-report", "berger-scan", "decompose"};
}

Report run_suite(const std::string& suite, const RunConfig& config) {
  validate(config);
  Report r;
  r.command = suite;
  r.config = config;
  r.config.suite = suite;
  if (suite == "identity-check")
    identity_check(r, config);
  else if (suite == "critical-check")
    critical_check(r, config);
  else if (suite == "hessian-compare")
    hessian_compare(r, config);
  else if (suite == "stability-report")
    stability_report(r, config);
  else if (suite == "berger-scan")
    berger(r, config);
  else if (suite == "decompose")
    decompose(r, config);
  else
    throw ConfigError("unknown subcommand: " + suite);
  return r;
}

}  // namespace rpstab
