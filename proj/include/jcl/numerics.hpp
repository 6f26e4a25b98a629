#ifndef JCL_NUMERICS_HPP
#define JCL_NUMERICS_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jcl {

/// Dense real vector; used for queries, keys and raw inputs alike.
using Vector = std::vector<double>;

/// Thrown when an intermediate quantity becomes NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  /// Builds from nested rows; all rows must have equal length.
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Matrix scaled(double s) const;
  double trace() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Diagonal shift used when certifying positive semidefiniteness.
inline constexpr double kPsdShift = 1e-10;

/// Seedable 64-bit generator (mt19937_64) with portable uniform/normal
/// transforms; the standard distributions are implementation-defined and
/// are deliberately not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes two words, caches nothing.
  double normal();
  /// Uniform integer in [0, n), unbiased by rejection.
  std::size_t index(std::size_t n);
  Vector normal_vector(std::size_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  /// Engine state as decimal text; restores bit-exactly with `restore`.
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

bool all_finite(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
/// Throws std::invalid_argument for a zero or non-finite vector.
Vector l2_normalize(std::span<const double> v);
bool is_normalized(std::span<const double> v, double tol = 1e-9);

/// log(sum(exp(t))) with max subtraction. Throws on empty input.
double log_sum_exp(std::span<const double> terms);

Vector mat_vec(const Matrix& m, std::span<const double> v);
/// q^T S q with a fixed accumulation order.
double quadratic_form(std::span<const double> q, const Matrix& s);

bool is_symmetric(const Matrix& s);
/// True iff s is symmetric, finite, and a plain Cholesky of s + kPsdShift*I
/// succeeds.
bool is_psd(const Matrix& s);

/// Pivoted Cholesky factor of a PSD matrix, truncated once the largest
/// remaining pivot drops below `tol`. Returns L (n x rank) with L L^T ~= s.
/// Zero-variance directions get exact zero rows.
Matrix pivoted_cholesky(const Matrix& s, double tol = kPsdShift);

/// Draws from N(mu, cov). The covariance is certified and factorised once
/// at construction; every draw consumes exactly mu.size() normals.
class GaussianSampler {
 public:
  GaussianSampler(Vector mu, const Matrix& cov);

  std::size_t dim() const { return mu_.size(); }
  std::size_t rank() const { return factor_.cols(); }
  const Matrix& factor() const { return factor_; }

  Vector sample(Rng& rng) const;
  void sample_into(Rng& rng, std::span<double> out, std::span<double> scratch) const;

 private:
  Vector mu_;
  Matrix factor_;
};

Vector sample_gaussian(std::span<const double> mu, const Matrix& cov, Rng& rng);

}  // namespace jcl

#endif  // JCL_NUMERICS_HPP
