#include "jcl/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace jcl {
namespace {

void check_negatives(const Matrix& negatives, std::size_t d) {
  if (negatives.rows() > 0 && negatives.cols() != d) {
    throw std::invalid_argument("negatives: dimension mismatch");
  }
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive and finite");
}

// Shared softmax-contrast kernel. With logits l_0 (positive, possibly
// augmented) and l_j = q.k_j/tau, and an anchor logit subtracted at the end:
//
//   value = log(exp(l_0) + sum_j exp(l_j)) - anchor
//         = log(exp(l_0 - anchor) + sum_j exp(l_j - anchor))
//   grad  = w_0 * dl_0/dq + sum_j w_j * k_j/tau - d anchor/dq
//
// where w are the softmax weights. pos_shift is l_0 - anchor.
LossResult softmax_contrast(std::span<const double> q, double pos_shift,
                            std::span<const double> pos_grad, double anchor,
                            std::span<const double> anchor_grad, const Matrix& negatives,
                            double tau, bool with_grad) {
  const std::size_t d = q.size();
  const std::size_t k = negatives.rows();
  Vector terms(k + 1);
  terms[0] = pos_shift;
  for (std::size_t j = 0; j < k; ++j) terms[j + 1] = dot(q, negatives.row(j)) / tau - anchor;

  LossResult out;
  const double lse = log_sum_exp(terms);
  out.value = lse;
  if (!std::isfinite(out.value)) throw NumericError("contrastive loss: non-finite value");
  if (!with_grad) return out;

  Vector neg_pull(d, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double w = std::exp(terms[j + 1] - lse);
    const auto row = negatives.row(j);
    for (std::size_t a = 0; a < d; ++a) neg_pull[a] += w * row[a];
  }
  const double w0 = std::exp(terms[0] - lse);
  out.grad_query.resize(d);
  for (std::size_t a = 0; a < d; ++a) {
    out.grad_query[a] = w0 * pos_grad[a] + neg_pull[a] / tau - anchor_grad[a];
  }
  if (!all_finite(out.grad_query)) throw NumericError("contrastive loss: non-finite gradient");
  return out;
}

LossResult pair_loss_impl(std::span<const double> q, std::span<const double> k_pos,
                          const Matrix& negatives, double tau, bool with_grad) {
  check_tau(tau);
  if (q.size() != k_pos.size()) throw std::invalid_argument("pair_loss: dimension mismatch");
  check_negatives(negatives, q.size());
  const double pos = dot(q, k_pos) / tau;
  Vector key_grad;
  if (with_grad) {
    key_grad.resize(q.size());
    for (std::size_t a = 0; a < q.size(); ++a) key_grad[a] = k_pos[a] / tau;
  }
  return softmax_contrast(q, 0.0, key_grad, pos, key_grad, negatives, tau, with_grad);
}

LossResult jcl_loss_impl(const ContrastiveInstance& inst, const LossParams& params,
                         bool with_grad) {
  params.validate();
  const Vector& q = inst.query;
  const std::size_t d = q.size();
  const PositiveKeyStats& st = inst.pos_stats;
  if (st.mu.size() != d || st.sigma.rows() != d || st.sigma.cols() != d) {
    throw std::invalid_argument("jcl_loss: dimension mismatch");
  }
  static const Matrix kNoNegatives;
  const Matrix& negatives = inst.negatives ? *inst.negatives : kNoNegatives;
  check_negatives(negatives, d);

  const double tau = params.tau;
  const Vector sq = mat_vec(st.sigma, q);
  const double a = dot(q, st.mu) / tau;
  const double c = params.lambda / (2.0 * tau * tau) * dot(q, sq);
  if (!std::isfinite(a) || !std::isfinite(c)) throw NumericError("jcl_loss: non-finite exponent");

  Vector mean_grad;
  Vector pos_grad;
  if (with_grad) {
    const double coef = params.lambda / (tau * tau);
    mean_grad.resize(d);
    pos_grad.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      mean_grad[i] = st.mu[i] / tau;
      pos_grad[i] = mean_grad[i] + coef * sq[i];
    }
  }
  return softmax_contrast(q, c, pos_grad, a, mean_grad, negatives, tau, with_grad);
}

}  // namespace

NegativeKeys make_negatives(Matrix rows) { return std::make_shared<const Matrix>(std::move(rows)); }

NegativeKeys make_negatives(const std::vector<Vector>& rows, std::size_t dim) {
  Matrix m(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != dim) throw std::invalid_argument("make_negatives: dimension mismatch");
    for (std::size_t a = 0; a < dim; ++a) m(r, a) = rows[r][a];
  }
  return make_negatives(std::move(m));
}

void LossParams::validate() const {
  check_tau(tau);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be non-negative and finite");
  }
}

double pair_loss(std::span<const double> q, std::span<const double> k_pos,
                 const Matrix& negatives, double tau) {
  return pair_loss_impl(q, k_pos, negatives, tau, false).value;
}

LossResult pair_loss_with_grad(std::span<const double> q, std::span<const double> k_pos,
                               const Matrix& negatives, double tau) {
  return pair_loss_impl(q, k_pos, negatives, tau, true);
}

double info_nce_batch(std::span<const PairInstance> batch, double tau) {
  if (batch.empty()) throw std::invalid_argument("info_nce_batch: empty batch");
  static const Matrix kNoNegatives;
  double total = 0.0;
  for (const PairInstance& p : batch) {
    total += pair_loss(p.query, p.positive, p.negatives ? *p.negatives : kNoNegatives, tau);
  }
  return total / static_cast<double>(batch.size());
}

double vanilla_multi_key_loss(std::span<const double> q, const std::vector<Vector>& keys,
                              const Matrix& negatives, double tau) {
  if (keys.empty()) throw std::invalid_argument("vanilla_multi_key_loss: no positive keys");
  double total = 0.0;
  for (const Vector& k : keys) total += pair_loss(q, k, negatives, tau);
  return total / static_cast<double>(keys.size());
}

LossResult vanilla_multi_key_loss_with_grad(std::span<const double> q,
                                            const std::vector<Vector>& keys,
                                            const Matrix& negatives, double tau) {
  if (keys.empty()) throw std::invalid_argument("vanilla_multi_key_loss: no positive keys");
  LossResult out;
  out.grad_query.assign(q.size(), 0.0);
  for (const Vector& k : keys) {
    const LossResult r = pair_loss_with_grad(q, k, negatives, tau);
    out.value += r.value;
    for (std::size_t a = 0; a < q.size(); ++a) out.grad_query[a] += r.grad_query[a];
  }
  const double inv = 1.0 / static_cast<double>(keys.size());
  out.value *= inv;
  for (double& g : out.grad_query) g *= inv;
  return out;
}

McEstimate monte_carlo_inf_loss(const ContrastiveInstance& inst, const LossParams& params,
                                std::size_t samples, Rng& rng) {
  params.validate();
  if (samples == 0) throw std::invalid_argument("monte_carlo_inf_loss: need at least one sample");
  const Vector& q = inst.query;
  const std::size_t d = q.size();
  static const Matrix kNoNegatives;
  const Matrix& negatives = inst.negatives ? *inst.negatives : kNoNegatives;
  check_negatives(negatives, d);

  const GaussianSampler sampler(inst.pos_stats.mu, inst.pos_stats.sigma.scaled(params.lambda));
  const double tau = params.tau;
  Vector neg_logits(negatives.rows());
  for (std::size_t j = 0; j < negatives.rows(); ++j) neg_logits[j] = dot(q, negatives.row(j)) / tau;

  Vector key(d);
  Vector scratch(d);
  Vector terms(neg_logits.size() + 1);
  terms[0] = 0.0;
  // Welford: a run of identical losses keeps the mean bit-exact.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 1; n <= samples; ++n) {
    sampler.sample_into(rng, key, scratch);
    const double pos = dot(q, key) / tau;
    for (std::size_t j = 0; j < neg_logits.size(); ++j) terms[j + 1] = neg_logits[j] - pos;
    const double loss = log_sum_exp(terms);
    const double delta = loss - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (loss - mean);
  }
  McEstimate est;
  est.mean = mean;
  est.samples = samples;
  if (samples > 1) {
    const double var = m2 / static_cast<double>(samples - 1);
    est.std_err = std::sqrt(var / static_cast<double>(samples));
  }
  return est;
}

LossResult jcl_loss(const ContrastiveInstance& inst, const LossParams& params) {
  return jcl_loss_impl(inst, params, true);
}

BatchLoss jcl_batch_loss(std::span<const ContrastiveInstance> batch, const LossParams& params) {
  if (batch.empty()) throw std::invalid_argument("jcl_batch_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  BatchLoss out;
  out.grads.reserve(batch.size());
  double total = 0.0;
  for (const ContrastiveInstance& inst : batch) {
    LossResult r = jcl_loss(inst, params);
    total += r.value;
    for (double& g : r.grad_query) g *= inv;
    out.grads.push_back(std::move(r.grad_query));
  }
  out.value = total * inv;
  return out;
}

double gaussian_mgf_expectation(std::span<const double> a, std::span<const double> mu,
                                const Matrix& s) {
  if (a.size() != mu.size()) throw std::invalid_argument("gaussian_mgf_expectation: dimension mismatch");
  if (!is_psd(s)) throw std::invalid_argument("gaussian_mgf_expectation: covariance is not PSD");
  return dot(a, mu) + 0.5 * quadratic_form(a, s);
}

double jcl_scalar_form(double a, double c, double neg_mass) {
  if (neg_mass < 0.0) throw std::invalid_argument("jcl_scalar_form: negative mass must be >= 0");
  if (neg_mass == 0.0) return c;
  const double terms[2] = {c, std::log(neg_mass) - a};
  return log_sum_exp(terms);
}

}  // namespace jcl
