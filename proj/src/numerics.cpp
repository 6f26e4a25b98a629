#include "jcl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace jcl {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Matrix Matrix::scaled(double s) const {
  Matrix out = *this;
  for (double& x : out.data_) x *= s;
  return out;
}

double Matrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

Vector Rng::normal_vector(std::size_t n) {
  Vector v(n);
  for (double& x : v) x = normal();
  return v;
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (!is) throw std::invalid_argument("Rng::restore: malformed state");
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector l2_normalize(std::span<const double> v) {
  const double n = norm2(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("l2_normalize: degenerate embedding (zero or non-finite norm)");
  }
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

bool is_normalized(std::span<const double> v, double tol) {
  return std::abs(norm2(v) - 1.0) <= tol;
}

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) throw NumericError("log_sum_exp: non-finite term");
  if (terms.size() == 1) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

Vector mat_vec(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) throw std::invalid_argument("mat_vec: dimension mismatch");
  Vector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

double quadratic_form(std::span<const double> q, const Matrix& s) {
  if (!s.square() || s.rows() != q.size()) {
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) total += q[a] * dot(s.row(a), q);
  return total;
}

bool is_symmetric(const Matrix& s) {
  if (!s.square()) return false;
  for (std::size_t a = 0; a < s.rows(); ++a) {
    for (std::size_t b = a + 1; b < s.cols(); ++b) {
      if (std::abs(s(a, b) - s(b, a)) > 1e-12 * std::max(1.0, std::abs(s(a, b)))) return false;
    }
  }
  return true;
}

bool is_psd(const Matrix& s) {
  if (!is_symmetric(s) || !all_finite(s.data())) return false;
  const std::size_t n = s.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = s(j, j) + kPsdShift;
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return false;
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return true;
}

Matrix pivoted_cholesky(const Matrix& s, double tol) {
  if (!s.square()) throw std::invalid_argument("pivoted_cholesky: matrix not square");
  const std::size_t n = s.rows();
  // Residual Schur complement, updated in place.
  Matrix r = s;
  std::vector<Vector> columns;
  std::vector<bool> used(n, false);
  while (columns.size() < n) {
    std::size_t p = n;
    double best = tol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i] && r(i, i) > best) {
        best = r(i, i);
        p = i;
      }
    }
    if (p == n) break;
    used[p] = true;
    const double piv = std::sqrt(r(p, p));
    Vector col(n, 0.0);
    col[p] = piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i]) col[i] = r(i, p) / piv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (!used[k]) r(i, k) -= col[i] * col[k];
      }
    }
    columns.push_back(std::move(col));
  }
  Matrix l(n, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) l(i, c) = columns[c][i];
  }
  return l;
}

GaussianSampler::GaussianSampler(Vector mu, const Matrix& cov) : mu_(std::move(mu)) {
  if (!cov.square() || cov.rows() != mu_.size()) {
    throw std::invalid_argument("GaussianSampler: dimension mismatch");
  }
  if (!is_psd(cov)) throw std::invalid_argument("GaussianSampler: covariance is not PSD");
  factor_ = pivoted_cholesky(cov);
}

void GaussianSampler::sample_into(Rng& rng, std::span<double> out, std::span<double> scratch) const {
  const std::size_t n = mu_.size();
  for (std::size_t i = 0; i < n; ++i) scratch[i] = rng.normal();
  const std::size_t k = factor_.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t c = 0; c < k; ++c) v += factor_(i, c) * scratch[c];
    out[i] = mu_[i] + v;
  }
}

Vector GaussianSampler::sample(Rng& rng) const {
  Vector out(mu_.size());
  Vector scratch(mu_.size());
  sample_into(rng, out, scratch);
  return out;
}

Vector sample_gaussian(std::span<const double> mu, const Matrix& cov, Rng& rng) {
  return GaussianSampler(Vector(mu.begin(), mu.end()), cov).sample(rng);
}

}  // namespace jcl
