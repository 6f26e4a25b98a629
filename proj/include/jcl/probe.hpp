#ifndef JCL_PROBE_HPP
#define JCL_PROBE_HPP

#include <cstddef>
#include <vector>

#include "jcl/encoder.hpp"
#include "jcl/trainer.hpp"

namespace jcl {

struct ProbeConfig {
  std::size_t epochs = 100;
  double lr = 1.0;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  /// Augmented views per training-set instance used to fit the classifier.
  std::size_t views_per_instance = 2;
  /// Fresh held-out instances, one augmented view each, used for evaluation.
  std::size_t test_instances = 500;
  FeatureTap tap = FeatureTap::kBackbone;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::size_t classes = 0;
};

/// Multinomial logistic regression fitted by mini-batch SGD with momentum;
/// the learning rate drops by 10x at 60% and again at 80% of the epochs.
/// Deterministic given `rng`.
ProbeResult linear_probe(const std::vector<Vector>& train_x, const std::vector<std::size_t>& train_y,
                         const std::vector<Vector>& test_x, const std::vector<std::size_t>& test_y,
                         std::size_t classes, const ProbeConfig& cfg, Rng& rng);

/// Freezes `encoder` and probes it on the synthetic task described by
/// `config`: fits on views of the training set, evaluates on held-out
/// instances from the same cluster model.
ProbeResult probe_encoder(const EncoderParams& encoder, const TrainConfig& config,
                          const ProbeConfig& cfg, Rng& rng);

}  // namespace jcl

#endif  // JCL_PROBE_HPP
