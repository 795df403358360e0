#include "rpstab/spectral.hpp"
#include "rpstab/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace rpstab {

namespace {
int g_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

bool gamma_pole(double z) { return z <= 0.0 && std::floor(z) == z; }
}  // namespace

int num_threads() { return g_threads; }
void set_num_threads(int n) { g_threads = std::max(1, n); }

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double sin_power_moment(int p, int k) {
  if (k % 2 != 0) return 0.0;
  // 2 * int_0^pi sin^p t cos(kt) dt, closed form via Gamma functions.
  const double nu = p, a = std::abs(k);
  const double z1 = 1.0 + nu / 2.0 + a / 2.0, z2 = 1.0 + nu / 2.0 - a / 2.0;
  if (gamma_pole(z1) || gamma_pole(z2)) return 0.0;
  const double lg = std::lgamma(nu + 1.0) - nu * std::log(2.0) - std::lgamma(z1) - std::lgamma(z2);
  double sign = std::cos(a * M_PI / 2.0) > 0 ? 1.0 : -1.0;
  if (z2 < 0.0) {
    // lgamma drops the sign of Gamma at negative arguments
    if (static_cast<long>(std::floor(z2)) % 2 != 0) sign = -sign;
  }
  return 2.0 * M_PI * sign * std::exp(lg);
}

Axis periodic_axis(int n, int sin_power) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("periodic axis needs an even node count >= 4");
  Axis ax;
  ax.kind = AxisKind::Periodic;
  ax.n = n;
  ax.lo = 0.0;
  ax.hi = 2.0 * M_PI;
  const double h = 2.0 * M_PI / n;
  ax.nodes.resize(n);
  for (int j = 0; j < n; ++j) ax.nodes[j] = (j + 0.5) * h;

  std::vector<double> mom(n / 2);
  for (int k = 0; k < n / 2; ++k) mom[k] = sin_power_moment(sin_power, k);
  ax.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    double w = mom[0];
    for (int k = 1; k < n / 2; ++k) w += 2.0 * mom[k] * std::cos(k * ax.nodes[j]);
    ax.weights[j] = w / n;
  }

  ax.d1 = Eigen::MatrixXd::Zero(n, n);
  ax.d2 = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) {
        ax.d2(j, k) = -M_PI * M_PI / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      const double sgn = ((j - k) % 2 == 0) ? 1.0 : -1.0;
      const double half = 0.5 * (j - k) * h;
      ax.d1(j, k) = 0.5 * sgn / std::tan(half);
      ax.d2(j, k) = -0.5 * sgn / (std::sin(half) * std::sin(half));
    }
  }
  return ax;
}

Axis chebyshev_axis(int n, double lo, double hi) {
  if (n < 3) throw std::invalid_argument("chebyshev axis needs at least 3 nodes");
  Axis ax;
  ax.kind = AxisKind::Chebyshev;
  ax.n = n;
  ax.lo = lo;
  ax.hi = hi;
  const int N = n - 1;
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = std::cos(M_PI * j / N);

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  auto cfac = [&](int i) { return (i == 0 || i == N ? 2.0 : 1.0) * ((i % 2) ? -1.0 : 1.0); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) D(i, j) = cfac(i) / cfac(j) / (x[i] - x[j]);
  for (int i = 0; i < n; ++i) D(i, i) = -D.row(i).sum();  // negative-sum trick

  // Clenshaw-Curtis on [-1, 1]
  std::vector<double> w(n, 0.0);
  std::vector<double> v(N - 1 > 0 ? N - 1 : 0, 1.0);
  const double th = M_PI / N;
  if (N % 2 == 0) {
    w[0] = w[N] = 1.0 / (N * N - 1.0);
    for (int k = 1; k < N / 2; ++k)
      for (int i = 1; i < N; ++i) v[i - 1] -= 2.0 * std::cos(2.0 * k * i * th) / (4.0 * k * k - 1.0);
    for (int i = 1; i < N; ++i) v[i - 1] -= std::cos(N * i * th) / (N * N - 1.0);
  } else {
    w[0] = w[N] = 1.0 / (double(N) * N);
    for (int k = 1; k <= (N - 1) / 2; ++k)
      for (int i = 1; i < N; ++i) v[i - 1] -= 2.0 * std::cos(2.0 * k * i * th) / (4.0 * k * k - 1.0);
  }
  for (int i = 1; i < N; ++i) w[i] = 2.0 * v[i - 1] / N;

  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  ax.nodes.resize(n);
  ax.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    ax.nodes[j] = mid + half * x[j];
    ax.weights[j] = half * w[j];
  }
  ax.d1 = D / half;
  ax.d2 = ax.d1 * ax.d1;
  return ax;
}

}  // namespace rpstab
