#ifndef JCL_OPTIMIZER_HPP
#define JCL_OPTIMIZER_HPP

#include <cstddef>

#include "jcl/encoder.hpp"

namespace jcl {

/// SGD with heavy-ball momentum and L2 weight decay:
///   v <- momentum * v + (g + weight_decay * theta)
///   theta <- theta - lr * v
class SgdOptimizer {
 public:
  SgdOptimizer(double momentum, double weight_decay)
      : momentum_(momentum), weight_decay_(weight_decay) {}

  double momentum() const { return momentum_; }
  double weight_decay() const { return weight_decay_; }

  /// Throws NumericError for a non-finite gradient, before touching params.
  void step(EncoderParams& params, const EncoderParams& grads, double lr);

  /// Momentum buffer; empty before the first step.
  const EncoderParams& velocity() const { return velocity_; }
  void set_velocity(EncoderParams v) { velocity_ = std::move(v); }

 private:
  double momentum_;
  double weight_decay_;
  EncoderParams velocity_;
};

/// lr0 * (1 + cos(pi * step / total)) / 2.
double cosine_lr(std::size_t step, std::size_t total, double lr0);

}  // namespace jcl

#endif  // JCL_OPTIMIZER_HPP
