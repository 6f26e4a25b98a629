#ifndef JCL_KEY_STATISTICS_HPP
#define JCL_KEY_STATISTICS_HPP

#include <cstddef>
#include <vector>

#include "jcl/numerics.hpp"

namespace jcl {

/// Sufficient statistics of the positive keys of one instance.
struct PositiveKeyStats {
  Vector mu;
  Matrix sigma;
  std::size_t count = 0;
};

Vector compute_mean(const std::vector<Vector>& keys);

/// Mean and biased (1/M') covariance of the keys. Sigma is exactly
/// symmetric: the upper triangle is computed and mirrored.
PositiveKeyStats compute_covariance(const std::vector<Vector>& keys);

bool stats_psd_check(const PositiveKeyStats& stats);

}  // namespace jcl

#endif  // JCL_KEY_STATISTICS_HPP
