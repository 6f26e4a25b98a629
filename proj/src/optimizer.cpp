#include "jcl/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jcl {
namespace {

void update(std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& v,
            double momentum, double decay, double lr) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    v[i] = momentum * v[i] + (g[i] + decay * theta[i]);
    theta[i] -= lr * v[i];
  }
}

}  // namespace

void SgdOptimizer::step(EncoderParams& params, const EncoderParams& grads, double lr) {
  if (!params.same_shape(grads)) throw std::invalid_argument("sgd_step: gradient shape mismatch");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("sgd_step: lr must be finite and >= 0");
  for (const DenseLayer& l : grads.layers) {
    if (!all_finite(l.weight.data()) || !all_finite(l.bias)) {
      throw NumericError("sgd_step: non-finite gradient");
    }
  }
  if (velocity_.layers.empty()) velocity_ = params.zeros_like();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight.data(), grads.layers[l].weight.data(),
           velocity_.layers[l].weight.data(), momentum_, weight_decay_, lr);
    update(params.layers[l].bias, grads.layers[l].bias, velocity_.layers[l].bias, momentum_,
           weight_decay_, lr);
  }
}

double cosine_lr(std::size_t step, std::size_t total, double lr0) {
  if (total == 0 || step > total) throw std::invalid_argument("cosine_lr: step out of range");
  const double t = static_cast<double>(step) / static_cast<double>(total);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace jcl
