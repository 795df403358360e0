#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "rpstab/parallel.hpp"
#include "rpstab/suites.hpp"

using namespace rpstab;

int main(int argc, char** argv) {
  CLI::App app{"rpstab: stability checks for the L^p curvature functional at Einstein metrics"};
  std::string config_path, out_path;
  std::vector<double> ps;
  int resolution = 0, threads = -1;
  long long seed = -1;
  bool timing = false;
  std::string suite;
  app.add_option("subcommand", suite, "one of: identity-check critical-check hessian-compare stability-report "
                                      "berger-scan decompose")
      ->required();
  app.add_option("--config", config_path, "TOML config file");
  app.add_option("--out", out_path, "JSON report path (stdout if absent)");
  app.add_option("--p", ps, "p values (repeat or comma separated)")->delimiter(',');
  app.add_option("--resolution", resolution, "grid points per chart axis");
  app.add_option("--seed", seed, "seed for test variations");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_flag("--timing", timing, "include wall-clock timings in the report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (!ps.empty()) cfg.p = ps;
    if (resolution) cfg.resolution = resolution;
    if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
    if (threads >= 0) cfg.threads = threads;
    if (timing) cfg.timing = true;
    if (!out_path.empty()) cfg.out = out_path;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  }
  set_num_threads(cfg.threads > 0 ? cfg.threads : int(std::max(1u, std::thread::hardware_concurrency())));

  Report report;
  try {
    report = run_suite(suite, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  }
  const std::string json = to_json_string(report, cfg.timing);
  if (cfg.out.empty()) {
    std::cout << json;
    std::cerr << summary_table(report);
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << cfg.out << "\n";
      return 3;
    }
    f << json;
    std::cout << summary_table(report);
  }
  return exit_code(report);
}
