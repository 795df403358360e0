#include "rpstab/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "toml.hpp"

namespace rpstab {

namespace {

const std::vector<std::string> kGeometryKinds = {"sphere", "hyperbolic", "product_sphere", "product_hyperbolic",
                                                 "sphere_x_hyperbolic"};

template <class T>
T get_or(const toml::node_view<const toml::node>& v, T fallback, const char* what) {
  if (!v) return fallback;
  auto x = v.value<T>();
  if (!x) throw ConfigError(std::string("config: bad value for ") + what);
  return *x;
}

std::vector<double> number_list(const toml::node_view<const toml::node>& v, const char* what) {
  std::vector<double> out;
  if (!v) return out;
  if (auto x = v.value<double>()) return {*x};
  auto* arr = v.as_array();
  if (!arr) throw ConfigError(std::string("config: ") + what + " must be a number or an array");
  for (auto& e : *arr) {
    auto d = e.value<double>();
    if (!d) throw ConfigError(std::string("config: non-numeric entry in ") + what);
    out.push_back(*d);
  }
  return out;
}

RunConfig from_table(const toml::table& t) {
  RunConfig c;
  const toml::node_view<const toml::node> root{t};
  auto run = root["run"];
  c.suite = get_or<std::string>(run["suite"], "", "run.suite");
  c.seed = static_cast<unsigned>(get_or<int64_t>(run["seed"], 1, "run.seed"));
  c.threads = static_cast<int>(get_or<int64_t>(run["threads"], 0, "run.threads"));
  if (run["resolution"]) c.resolution = static_cast<int>(get_or<int64_t>(run["resolution"], 24, "run.resolution"));
  c.p = number_list(run["p"], "run.p");
  c.fd_step = get_or<double>(run["fd_step"], c.fd_step, "run.fd_step");
  c.variations = static_cast<int>(get_or<int64_t>(run["variations"], c.variations, "run.variations"));
  c.out = get_or<std::string>(run["out"], "", "run.out");
  c.timing = get_or<bool>(run["timing"], false, "run.timing");
  c.margin = get_or<bool>(run["margin"], false, "run.margin");
  auto tol = root["tolerances"];
  c.tol_analytic = get_or<double>(tol["analytic"], c.tol_analytic, "tolerances.analytic");
  c.tol_fd = get_or<double>(tol["fd"], c.tol_fd, "tolerances.fd");
  auto b = root["berger"];
  c.t_min = get_or<double>(b["t_min"], c.t_min, "berger.t_min");
  c.t_max = get_or<double>(b["t_max"], c.t_max, "berger.t_max");
  c.t_tol = get_or<double>(b["tol"], c.t_tol, "berger.tol");
  c.t_samples = static_cast<int>(get_or<int64_t>(b["samples"], c.t_samples, "berger.samples"));
  if (auto geo = root["geometry"]) {
    auto* arr = geo.as_array();
    if (!arr) throw ConfigError("config: [[geometry]] must be an array of tables");
    for (auto& e : *arr) {
      auto* gt = e.as_table();
      if (!gt) throw ConfigError("config: [[geometry]] entries must be tables");
      const toml::node_view<const toml::node> g{*gt};
      GeometryConfig gc;
      gc.kind = get_or<std::string>(g["kind"], gc.kind, "geometry.kind");
      gc.dim = static_cast<int>(get_or<int64_t>(g["dim"], gc.dim, "geometry.dim"));
      gc.curvature = get_or<double>(g["curvature"], gc.kind.find("hyperbolic") == 0 ? -1.0 : 1.0, "geometry.curvature");
      if (g["resolution"]) gc.resolution = static_cast<int>(get_or<int64_t>(g["resolution"], 0, "geometry.resolution"));
      c.geometries.push_back(gc);
    }
  }
  return c;
}

}  // namespace

RunConfig load_config_string(const std::string& text) {
  try {
    return from_table(toml::parse(text));
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + std::string(e.description()));
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_string(ss.str());
}

void validate(const RunConfig& c) {
  if (!(c.tol_analytic > 0.0) || !(c.tol_fd > 0.0)) throw ConfigError("tolerances must be > 0");
  if (!(c.fd_step > 0.0)) throw ConfigError("fd_step must be > 0");
  for (double p : c.p)
    if (!(p >= 2.0)) throw ConfigError("p entries must be >= 2");
  if (c.resolution && *c.resolution < 4) throw ConfigError("resolution must be >= 4");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  if (c.variations < 1) throw ConfigError("variations must be >= 1");
  if (!(c.t_min > 0.0 && c.t_max > c.t_min && c.t_max <= 1.5)) throw ConfigError("berger t range must lie in (0, 1.5]");
  if (!(c.t_tol > 0.0) || c.t_samples < 3) throw ConfigError("berger tol > 0 and samples >= 3 required");
  for (auto& g : c.geometries) {
    if (std::find(kGeometryKinds.begin(), kGeometryKinds.end(), g.kind) == kGeometryKinds.end())
      throw ConfigError("unknown geometry kind: " + g.kind);
    if (g.dim < 3) throw ConfigError("geometry dim must be >= 3");
    if (g.curvature == 0.0) throw ConfigError("geometry curvature must be nonzero");
    if (g.resolution && *g.resolution < 4) throw ConfigError("geometry resolution must be >= 4");
  }
}

nlohmann::ordered_json config_echo(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["suite"] = c.suite;
  j["seed"] = c.seed;
  if (c.resolution) j["resolution"] = *c.resolution;
  j["p"] = c.p;
  j["fd_step"] = c.fd_step;
  j["tolerances"] = {{"analytic", c.tol_analytic}, {"fd", c.tol_fd}};
  j["variations"] = c.variations;
  j["margin"] = c.margin;
  j["berger"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"tol", c.t_tol}, {"samples", c.t_samples}};
  auto geo = nlohmann::ordered_json::array();
  for (auto& g : c.geometries) {
    nlohmann::ordered_json e = {{"kind", g.kind}, {"dim", g.dim}, {"curvature", g.curvature}};
    if (g.resolution) e["resolution"] = *g.resolution;
    geo.push_back(e);
  }
  j["geometry"] = geo;
  // thread count is left out on purpose: reports must not depend on it
  return j;
}

std::string status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Flag: return "flag";
    case Status::Info: return "info";
  }
  return "?";
}

Record& Report::check_le(const std::string& name, const std::string& anchor, double value, double tol) {
  records.push_back({name, anchor, value, tol, (std::isfinite(value) && value <= tol) ? Status::Pass : Status::Fail});
  return records.back();
}

Record& Report::check_gt(const std::string& name, const std::string& anchor, double value, double bound) {
  records.push_back({name, anchor, value, bound, (std::isfinite(value) && value > bound) ? Status::Pass : Status::Fail});
  return records.back();
}

Record& Report::info(const std::string& name, const std::string& anchor, double value) {
  records.push_back({name, anchor, value, 0.0, Status::Info});
  return records.back();
}

Record& Report::flag(const std::string& name, const std::string& anchor, double value) {
  records.push_back({name, anchor, value, 0.0, Status::Flag});
  return records.back();
}

int exit_code(const Report& r) {
  bool flagged = false;
  for (auto& x : r.records) {
    if (x.status == Status::Fail) return 1;
    if (x.status == Status::Flag) flagged = true;
  }
  return flagged ? 2 : 0;
}

namespace {

nlohmann::ordered_json num(double v) {
  // JSON has no inf/nan
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

nlohmann::ordered_json to_json(const Report& r, bool with_timing) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "rpstab";
  j["tool_version"] = kToolVersion;
  j["command"] = r.command;
  j["config"] = config_echo(r.config);
  auto cal = nlohmann::ordered_json::array();
  for (auto& c : r.calibration)
    cal.push_back({{"geometry", c.geometry},
                   {"deltaD_sign", c.cal.sign},
                   {"defect_plus", num(c.cal.defect_plus)},
                   {"defect_minus", num(c.cal.defect_minus)}});
  j["sign_calibration"] = cal;
  auto recs = nlohmann::ordered_json::array();
  std::map<std::string, int> count = {{"pass", 0}, {"fail", 0}, {"flag", 0}, {"info", 0}};
  for (auto& x : r.records) {
    recs.push_back({{"name", x.name},
                    {"anchor", x.anchor},
                    {"value", num(x.value)},
                    {"tol", num(x.tol)},
                    {"status", status_name(x.status)}});
    ++count[status_name(x.status)];
  }
  j["records"] = recs;
  j["data"] = r.data;
  j["summary"] = {{"records", r.records.size()}, {"pass", count["pass"]}, {"fail", count["fail"]},
                  {"flag", count["flag"]},       {"info", count["info"]}, {"exit_code", exit_code(r)}};
  if (with_timing) {
    nlohmann::ordered_json t;
    for (auto& [k, v] : r.timing) t[k] = v;
    j["timing_seconds"] = t;
  }
  return j;
}

std::string to_json_string(const Report& r, bool with_timing) { return to_json(r, with_timing).dump(2) + "\n"; }

std::string summary_table(const Report& r) {
  std::ostringstream os;
  std::size_t w = 4;
  for (auto& x : r.records) w = std::max(w, x.name.size());
  w = std::min<std::size_t>(w, 60);
  os << std::left << std::setw(int(w)) << "check" << "  " << std::setw(6) << "status" << "  " << std::setw(14) << "value"
     << "  tol\n";
  for (auto& x : r.records) {
    os << std::left << std::setw(int(w)) << x.name << "  " << std::setw(6) << status_name(x.status) << "  "
       << std::setw(14) << std::setprecision(6) << x.value << "  ";
    if (x.status == Status::Info || x.status == Status::Flag)
      os << "-";
    else
      os << x.tol;
    os << "\n";
  }
  os << "exit code " << exit_code(r) << "\n";
  return os.str();
}

}  // namespace rpstab
