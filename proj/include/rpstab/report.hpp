#ifndef RPSTAB_REPORT_HPP
#define RPSTAB_REPORT_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "rpstab/tensor_calculus.hpp"

namespace rpstab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryConfig {
  std::string kind = "sphere";  // sphere, hyperbolic, product_sphere, product_hyperbolic, sphere_x_hyperbolic
  int dim = 3;                  // n, or factor dimension m for products
  double curvature = 1.0;
  std::optional<int> resolution;
};

struct RunConfig {
  std::string suite;
  std::vector<GeometryConfig> geometries;  // empty: suite defaults
  std::vector<double> p;                   // empty: suite defaults
  std::optional<int> resolution;
  double fd_step = 2e-2;
  double tol_analytic = 1e-6;
  double tol_fd = 1e-3;
  unsigned seed = 1;
  int threads = 0;  // 0: hardware concurrency
  int variations = 5;
  std::string out;
  bool timing = false;
  bool margin = false;
  double t_min = 0.02, t_max = 1.5, t_tol = 1e-7;
  int t_samples = 150;
};

RunConfig load_config_file(const std::string& path);
RunConfig load_config_string(const std::string& toml_text);
nlohmann::ordered_json config_echo(const RunConfig& c);
void validate(const RunConfig& c);  // throws ConfigError

enum class Status { Pass, Fail, Flag, Info };
std::string status_name(Status s);

struct Record {
  std::string name;
  std::string anchor;
  double value = 0.0;
  double tol = 0.0;
  Status status = Status::Info;
};

struct CalibrationRecord {
  std::string geometry;
  SignCalibration cal;
};

struct Report {
  std::string command;
  RunConfig config;
  std::vector<CalibrationRecord> calibration;
  std::vector<Record> records;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, double>> timing;

  // value <= tol passes
  Record& check_le(const std::string& name, const std::string& anchor, double value, double tol);
  // value > 0 passes (tol records the margin asked for, usually 0)
  Record& check_gt(const std::string& name, const std::string& anchor, double value, double bound = 0.0);
  Record& info(const std::string& name, const std::string& anchor, double value);
  Record& flag(const std::string& name, const std::string& anchor, double value);
};

int exit_code(const Report& r);
nlohmann::ordered_json to_json(const Report& r, bool with_timing);
std::string to_json_string(const Report& r, bool with_timing);
std::string summary_table(const Report& r);

}  // namespace rpstab

#endif
