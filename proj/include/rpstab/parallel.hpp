#ifndef RPSTAB_PARALLEL_HPP
#define RPSTAB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace rpstab {

// Global worker count. Kernels write disjoint outputs, so the result never
// depends on this value.
int num_threads();
void set_num_threads(int n);

template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t nt = std::min<std::size_t>(std::max(1, num_threads()), n);
  if (nt <= 1 || n < 4096) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&f, b, e] {
      for (std::size_t i = b; i < e; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Pairwise (tree) summation; fixed order for any thread count.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

}  // namespace rpstab

#endif
