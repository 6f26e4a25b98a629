#include <gtest/gtest.h>

#include "jcl/key_statistics.hpp"
#include "unit/oracles.hpp"

using namespace jcl;

TEST(ComputeMean, Examples) {
  EXPECT_EQ(compute_mean({{1, 0}}), (Vector{1, 0}));
  EXPECT_EQ(compute_mean({{1, 0}, {0, 1}}), (Vector{0.5, 0.5}));
  const Vector v{0.1, -0.7, 0.3};
  EXPECT_EQ(compute_mean({v, v, v, v, v}), v);
}

TEST(ComputeMean, Errors) {
  EXPECT_THROW(compute_mean({}), std::invalid_argument);
  EXPECT_THROW(compute_mean({{1, 0}, {1}}), std::invalid_argument);
}

TEST(ComputeCovariance, Examples) {
  const Vector v{0.6, 0.8};
  const PositiveKeyStats same = compute_covariance({v, v, v});
  EXPECT_EQ(same.sigma, Matrix(2, 2));
  EXPECT_EQ(same.count, 3u);

  const PositiveKeyStats one = compute_covariance({{0.3, 0.4}});
  EXPECT_EQ(one.sigma, Matrix(2, 2));
  EXPECT_EQ(one.count, 1u);

  const PositiveKeyStats two = compute_covariance({{1, 0}, {0, 1}});
  EXPECT_EQ(two.mu, (Vector{0.5, 0.5}));
  EXPECT_EQ(two.sigma, Matrix::from_rows({{0.25, -0.25}, {-0.25, 0.25}}));
}

TEST(ComputeCovariance, EmptyThrows) { EXPECT_THROW(compute_covariance({}), std::invalid_argument); }

TEST(ComputeCovariance, MatchesBruteForceAndInvariants) {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.index(16);
    const std::size_t m = 1 + rng.index(12);
    std::vector<Vector> keys;
    for (std::size_t i = 0; i < m; ++i) keys.push_back(oracle::random_unit(rng, d));
    const PositiveKeyStats s = compute_covariance(keys);
    const oracle::Stats ref = oracle::covariance(keys);

    EXPECT_EQ(s.count, m);
    EXPECT_LE(oracle::max_abs_diff(s.sigma, ref.sigma), 1e-12);
    for (std::size_t a = 0; a < d; ++a) {
      EXPECT_NEAR(s.mu[a], ref.mu[a], 1e-12);
      for (std::size_t b = 0; b < d; ++b) EXPECT_EQ(s.sigma(a, b), s.sigma(b, a));
    }
    EXPECT_TRUE(stats_psd_check(s));

    double spread = 0;
    for (const Vector& k : keys)
      for (std::size_t a = 0; a < d; ++a) spread += (k[a] - s.mu[a]) * (k[a] - s.mu[a]);
    EXPECT_NEAR(s.sigma.trace(), spread / static_cast<double>(m), 1e-12);

    const Vector shift = oracle::random_vector(rng, d, 5.0);
    std::vector<Vector> moved = keys;
    for (Vector& k : moved)
      for (std::size_t a = 0; a < d; ++a) k[a] += shift[a];
    EXPECT_LE(oracle::max_abs_diff(compute_covariance(moved).sigma, s.sigma), 1e-12);
  }
}

TEST(ComputeCovariance, RankBoundedByKeyCount) {
  Rng rng(5);
  std::vector<Vector> keys;
  for (int i = 0; i < 3; ++i) keys.push_back(oracle::random_unit(rng, 10));
  const PositiveKeyStats s = compute_covariance(keys);
  // Centered keys span at most M' - 1 directions.
  EXPECT_LE(pivoted_cholesky(s.sigma, 1e-12).cols(), 2u);
}

TEST(StatsPsdCheck, Examples) {
  PositiveKeyStats bad{{0, 0}, Matrix::from_rows({{1, 2}, {2, 1}}), 2};
  EXPECT_FALSE(stats_psd_check(bad));
  PositiveKeyStats zero{{0, 0}, Matrix(2, 2), 2};
  EXPECT_TRUE(stats_psd_check(zero));
  EXPECT_TRUE(stats_psd_check(compute_covariance({{1, 0}, {0, 1}, {0.6, 0.8}})));
}
