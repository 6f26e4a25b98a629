#include "jcl/key_statistics.hpp"

#include <stdexcept>

namespace jcl {

Vector compute_mean(const std::vector<Vector>& keys) {
  if (keys.empty()) throw std::invalid_argument("compute_mean: no keys");
  const std::size_t d = keys.front().size();
  // Running mean: identical keys reproduce the key exactly.
  Vector mu(d, 0.0);
  double n = 0.0;
  for (const Vector& k : keys) {
    if (k.size() != d) throw std::invalid_argument("compute_mean: dimension mismatch");
    n += 1.0;
    for (std::size_t a = 0; a < d; ++a) mu[a] += (k[a] - mu[a]) / n;
  }
  return mu;
}

PositiveKeyStats compute_covariance(const std::vector<Vector>& keys) {
  PositiveKeyStats stats;
  stats.mu = compute_mean(keys);
  stats.count = keys.size();
  const std::size_t d = stats.mu.size();

  std::vector<Vector> centered;
  centered.reserve(keys.size());
  for (const Vector& k : keys) {
    Vector c(d);
    for (std::size_t a = 0; a < d; ++a) c[a] = k[a] - stats.mu[a];
    centered.push_back(std::move(c));
  }

  const double inv = 1.0 / static_cast<double>(keys.size());
  stats.sigma = Matrix(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double s = 0.0;
      for (const Vector& c : centered) s += c[a] * c[b];
      stats.sigma(a, b) = s * inv;
      stats.sigma(b, a) = stats.sigma(a, b);
    }
  }
  return stats;
}

bool stats_psd_check(const PositiveKeyStats& stats) { return is_psd(stats.sigma); }

}  // namespace jcl
