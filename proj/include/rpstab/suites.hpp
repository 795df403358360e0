#ifndef RPSTAB_SUITES_HPP
#define RPSTAB_SUITES_HPP

#include <string>
#include <vector>

#include "rpstab/report.hpp"

namespace rpstab {

std::vector<std::string> suite_names();
// Throws ConfigError on unknown suites or geometries the suite cannot handle.
Report run_suite(const std::string& suite, const RunConfig& config);

// Smooth (band-limited) test variations on round spheres.
TensorField smooth_tt(const ConnectionData& c, int index, double tol = 1e-10);
TensorField smooth_conformal_f(const ConnectionData& c, int index);

}  // namespace rpstab

#endif
