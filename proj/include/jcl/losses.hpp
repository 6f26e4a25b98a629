#ifndef JCL_LOSSES_HPP
#define JCL_LOSSES_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "jcl/key_statistics.hpp"
#include "jcl/numerics.hpp"

namespace jcl {

/// Negative keys, one per row (K x d). Shared so that every instance of a
/// batch can reference the same queue snapshot without copying it.
using NegativeKeys = std::shared_ptr<const Matrix>;

NegativeKeys make_negatives(Matrix rows);
NegativeKeys make_negatives(const std::vector<Vector>& rows, std::size_t dim);

struct LossParams {
  double tau = 0.2;
  double lambda = 4.0;

  /// Throws std::invalid_argument unless tau > 0, lambda >= 0, both finite.
  void validate() const;
};

struct LossResult {
  double value = 0.0;
  Vector grad_query;
};

/// A query together with the statistics of its positive keys and the
/// negatives it is contrasted against.
struct ContrastiveInstance {
  Vector query;
  PositiveKeyStats pos_stats;
  NegativeKeys negatives;
};

/// A query with a single positive key.
struct PairInstance {
  Vector query;
  Vector positive;
  NegativeKeys negatives;
};

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t samples = 0;
};

struct BatchLoss {
  double value = 0.0;
  std::vector<Vector> grads;
};

/// -log softmax of the positive logit q.k+/tau against q.k-_j/tau.
double pair_loss(std::span<const double> q, std::span<const double> k_pos,
                 const Matrix& negatives, double tau);
LossResult pair_loss_with_grad(std::span<const double> q, std::span<const double> k_pos,
                               const Matrix& negatives, double tau);

double info_nce_batch(std::span<const PairInstance> batch, double tau);

/// Average of pair_loss over several positive keys sharing the negatives.
double vanilla_multi_key_loss(std::span<const double> q, const std::vector<Vector>& keys,
                              const Matrix& negatives, double tau);
LossResult vanilla_multi_key_loss_with_grad(std::span<const double> q,
                                            const std::vector<Vector>& keys,
                                            const Matrix& negatives, double tau);

/// Brute-force estimate of the expected pair loss with the positive key
/// drawn from N(mu, lambda * Sigma).
McEstimate monte_carlo_inf_loss(const ContrastiveInstance& inst, const LossParams& params,
                                std::size_t samples, Rng& rng);

/// Closed-form upper bound of the expected loss over Gaussian positive keys,
/// with its gradient with respect to the query:
///
///   L = log[exp(q.mu/tau + lambda/(2 tau^2) q'Sq) + sum_j exp(q.k_j/tau)] - q.mu/tau
///
/// Evaluated in log space; finite for exponents far beyond exp() range.
LossResult jcl_loss(const ContrastiveInstance& inst, const LossParams& params);

/// Batch mean of jcl_loss; grads[i] already carries the 1/N factor.
BatchLoss jcl_batch_loss(std::span<const ContrastiveInstance> batch, const LossParams& params);

/// log E[exp(a'x)] for x ~ N(mu, S), i.e. a'mu + a'Sa/2.
double gaussian_mgf_expectation(std::span<const double> a, std::span<const double> mu,
                                const Matrix& s);

/// The closed-form loss as a scalar function of a = q.mu/tau,
/// c = lambda/(2 tau^2) q'Sq and neg_mass = sum_j exp(q.k_j/tau).
double jcl_scalar_form(double a, double c, double neg_mass);

}  // namespace jcl

#endif  // JCL_LOSSES_HPP
