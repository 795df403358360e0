// One line per acceptance criterion; exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rpstab/parallel.hpp"
#include "rpstab/stability_report.hpp"
#include "rpstab/suites.hpp"
#include "rpstab/variation_decomposition.hpp"

using namespace rpstab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

GeometryConfig geo(const std::string& kind, int dim, double c, std::optional<int> res = std::nullopt) {
  GeometryConfig g;
  g.kind = kind;
  g.dim = dim;
  g.curvature = c;
  g.resolution = res;
  return g;
}

RunConfig config(const std::string& suite, std::vector<GeometryConfig> gs = {}, std::vector<double> p = {}) {
  RunConfig c;
  c.suite = suite;
  c.geometries = std::move(gs);
  c.p = std::move(p);
  return c;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

// every non-info record whose name matches passes; failures are listed
Outcome judge(const Report& r, const std::function<bool(const std::string&)>& select = nullptr) {
  Outcome o{true, ""};
  int n = 0, bad = 0;
  double worst = 0.0;
  for (auto& rec : r.records) {
    if (rec.status == Status::Info) continue;
    if (select && !select(rec.name)) continue;
    ++n;
    if (rec.status != Status::Pass) {
      ++bad;
      o.pass = false;
      o.detail += "\n      failing: " + rec.name + " = " + std::to_string(rec.value);
    } else if (std::isfinite(rec.tol) && rec.tol > 0) {
      worst = std::max(worst, rec.value / rec.tol);
    }
  }
  if (n == 0) return {false, "no matching records"};
  o.detail = std::to_string(n - bad) + "/" + std::to_string(n) + " checks pass, worst passing value/tol " +
             std::to_string(worst) + o.detail;
  return o;
}

ConnectionData sphere(int dim, double c, int res) {
  ManifoldSpec s;
  s.kind = ManifoldKind::RoundSphere;
  s.dim = dim;
  s.curvature = c;
  s.resolution = res;
  auto con = model_connection(build_manifold(s));
  calibrate_deltaD(con, 1);
  return con;
}

TensorField conformal(const ConnectionData& c, const TensorField& f) {
  auto h = compact(tensor(f, metric_field(c)));
  h.sym = Symmetry::Sym2;
  return h;
}

Report* sphere_hessian() {
  static Report r = run_suite("hessian-compare", config("hessian-compare", {geo("sphere", 3, 1.0)}, {2.0, 3.0}));
  return &r;
}
Report* product_hessian() {
  static Report r = run_suite("hessian-compare", config("hessian-compare", {geo("product_sphere", 3, 1.0)}, {2.0}));
  return &r;
}

Outcome criticality() {
  return judge(run_suite("critical-check", config("critical-check")));
}

Outcome identities() { return judge(run_suite("identity-check", config("identity-check"))); }

Outcome hessian_cross_validation() {
  return judge(*sphere_hessian(), [](const std::string& n) {
    return contains(n, "closed vs general") || contains(n, "vs FD");
  });
}

Outcome conformal_spectrum() {
  Outcome o{true, ""};
  double worst1 = 0.0;
  for (int n : {3, 4}) {
    auto c = sphere(n, 1.0, n == 3 ? 24 : 12);
    auto cp = curvature(c);
    for (double p : {2.0, 3.0})
      for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 2}}) {
        auto f = sphere_harmonic(c.manifold, 1, a, b);
        auto h = conformal(c, f);
        worst1 = std::max(worst1, std::abs(hessian_general(c, cp, h, h, p).value) / l2_inner(c, f, f));
      }
  }
  auto c = sphere(3, 1.0, 24);
  auto cp = curvature(c);
  double worst2 = 0.0;
  for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 3}}) {
    auto f = sphere_harmonic(c.manifold, 2, a, b);
    auto h = conformal(c, f);
    worst2 = std::max(worst2, std::abs(hessian_general(c, cp, h, h, 2.0).value / (140.0 * l2_inner(c, f, f)) - 1.0));
  }
  o.pass = worst1 <= 1e-6 && worst2 <= 1e-4;
  o.detail = "l=1 max |H|/||f||^2 " + std::to_string(worst1) + " (tol 1e-6), l=2 rel vs 140||f||^2 " +
             std::to_string(worst2) + " (tol 1e-4)";
  return o;
}

Outcome coefficient_algebra() {
  int bad = 0, total = 0;
  const std::vector<Rational> ps{Rational(2), Rational(5, 2), Rational(3), Rational(4), Rational(6)};
  for (int n : {3, 4, 5})
    for (auto& p : ps) {
      auto k = conformal_coeffs(n, p);
      total += 2;
      bad += k.b != k.a * n + k.d / n;
      bad += k.q(Rational(n)) != Rational(0);
    }
  for (int m : {3, 4, 5})
    for (Rational p(2); p <= 2 * m; p += Rational(1, 2)) {
      auto k = product_coeffs(m, p);
      const Rational a = (Rational(m) + p - 2) / m;
      total += 7;
      bad += k.a1 != (m - 1) * a + m;
      bad += k.u1 != Rational(2, m) * (Rational(3 * m * m - 3 * m - 2) - p * (m - 1));
      bad += k.b1 != Rational(-2 * (m - 1) * (m + 3));
      bad += k.d1 != Rational(4 * m * (m - 1));
      bad += k.b2 != -2 * (m - 1) * (2 * p - m - 1) || k.d2 != 4 * m * (m - 1) * (p - m);
      bad += !(k.q2(double(m)) > 0.0);
      bad += !(2 * k.a2 * m + k.b2 > Rational(0));
    }
  return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " exact rational checks hold"};
}

Outcome block_diagonality() {
  auto a = judge(*sphere_hessian(), [](const std::string& n) { return contains(n, "|H(h_tt, fg)|"); });
  auto b = judge(*product_hessian(), [](const std::string& n) { return contains(n, "| scaled"); });
  return {a.pass && b.pass, "S^3: " + a.detail + "; S^3xS^3: " + b.detail};
}

Outcome stability_margin() {
  auto c = sphere(3, 1.0, 16);
  auto cp = curvature(c);
  std::vector<TensorField> set;
  for (int i = 0; i < 5; ++i) set.push_back(smooth_tt(c, i));
  for (unsigned s = 1; s <= 2; ++s) set.push_back(tt_generator(c, s).h);
  const double q = margin_estimate(c, cp, 2.0, set);
  auto u = judge(*sphere_hessian(), [](const std::string& n) { return contains(n, "min TT Rayleigh"); });
  return {q > 12.0 && u.pass,
          "c=1 min quotient over " + std::to_string(set.size()) + " TT fields " + std::to_string(q) +
              " (> 12); unit volume: " + u.detail};
}

Outcome berger() { return judge(run_suite("berger-scan", config("berger-scan", {}, {2.0}))); }

Outcome verdict_table() {
  // ranges typed from the theorem statement; n is the total dimension
  auto claims = [](GeometryKind k, int dim, double p) {
    switch (k) {
      case GeometryKind::SphereForm: return true;
      case GeometryKind::Hyperbolic: return 2.0 * p >= dim;
      case GeometryKind::ProductSphere: return p <= 2.0 * dim;
      case GeometryKind::ProductHyperbolic: return p >= dim && p <= 2.0 * dim;
      default: return false;
    }
  };
  int bad = 0, total = 0, flagged = 0;
  for (auto k : {GeometryKind::SphereForm, GeometryKind::Hyperbolic, GeometryKind::ProductSphere,
                 GeometryKind::ProductHyperbolic})
    for (int d : {3, 4, 5})
      for (double p = 2.0; p <= 12.0; p += 0.5) {
        const double c = (k == GeometryKind::SphereForm || k == GeometryKind::ProductSphere) ? 1.0 : -1.0;
        auto v = verdict({k, d, c}, p);
        ++total;
        const bool in = claims(k, d, p);
        bool ok = v.theorem_claims_stable == in;
        if (in)
          ok = ok && (v.verdict == Verdict::StrictlyStable || v.verdict == Verdict::FlaggedDiscrepancy);
        else
          ok = ok && v.verdict != Verdict::StrictlyStable;
        flagged += v.verdict == Verdict::FlaggedDiscrepancy;
        bad += !ok;
      }
  const double th = verdict({GeometryKind::Hyperbolic, 5, -1.0}, 2.0).lambda1_threshold;
  auto anomaly = verdict({GeometryKind::ProductSphere, 3, 1.0}, 2.0);
  bool q1_flagged = false;
  for (auto& e : anomaly.evidence) q1_flagged |= !e.holds && std::abs(e.value + 3.0) < 1e-12;
  RunConfig cfg = config("stability-report", {geo("product_sphere", 3, 1.0)}, {2.0});
  const int code = exit_code(run_suite("stability-report", cfg));
  const bool pass = bad == 0 && std::abs(th - 1.0 / 13.0) < 1e-15 &&
                    anomaly.verdict == Verdict::FlaggedDiscrepancy && q1_flagged && code == 2;
  return {pass, std::to_string(total - bad) + "/" + std::to_string(total) + " grid points consistent (" +
                    std::to_string(flagged) + " flagged), threshold(5,2) = " + std::to_string(th) +
                    ", m=3 p=2 q1 flagged, exit code " + std::to_string(code)};
}

Outcome determinism() {
  std::vector<RunConfig> cfgs;
  auto id = config("identity-check", {geo("sphere", 3, 1.0, 16), geo("hyperbolic", 3, -1.0, 21)});
  id.variations = 2;
  cfgs.push_back(id);
  cfgs.push_back(config("stability-report"));
  auto hc = config("hessian-compare", {geo("sphere", 3, 1.0, 12)}, {2.0});
  hc.variations = 1;
  cfgs.push_back(hc);
  const int saved = num_threads();
  int same = 0;
  for (auto& c : cfgs) {
    set_num_threads(1);
    auto a = to_json_string(run_suite(c.suite, c), false);
    set_num_threads(8);
    auto b = to_json_string(run_suite(c.suite, c), false);
    same += a == b;
  }
  set_num_threads(saved);
  return {same == int(cfgs.size()),
          std::to_string(same) + "/" + std::to_string(cfgs.size()) + " reports byte-identical at 1 and 8 threads"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"criticality and trace identity", criticality},
      {"identity suites", identities},
      {"Hessian cross-validation", hessian_cross_validation},
      {"conformal spectrum", conformal_spectrum},
      {"coefficient algebra", coefficient_algebra},
      {"block diagonality", block_diagonality},
      {"TT stability margin", stability_margin},
      {"Berger scan", berger},
      {"verdict table", verdict_table},
      {"determinism", determinism},
  };
  int failed = 0, i = 0;
  for (auto& [name, fn] : criteria) {
    ++i;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("[%s] %2d %s (%.0f s): %s\n", o.pass ? "PASS" : "FAIL", i, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass\n", int(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
