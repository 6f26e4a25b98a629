#ifndef JCL_TRAINER_HPP
#define JCL_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jcl/encoder.hpp"
#include "jcl/losses.hpp"
#include "jcl/optimizer.hpp"
#include "jcl/queue.hpp"
#include "jcl/synthetic.hpp"

namespace jcl {

/// Training objective.
///  kJcl      closed-form loss over the statistics of M' positive keys
///  kInfoNce  single positive key per query
///  kVanilla  pair loss averaged over M' explicit positive keys
enum class Method { kJcl, kInfoNce, kVanilla };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t positive_keys = 5;
  double lambda = 4.0;
  double tau = 0.2;
  double momentum = 0.999;
  std::size_t queue_capacity = 512;
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  double lr = 0.03;
  double sgd_momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  std::size_t instances = 256;
  std::size_t ambient_dim = 64;
  std::size_t clusters = 10;
  double cluster_spread = 1.0;
  double aug_noise = 0.1;
  double aug_gain = 0.2;
  std::size_t style_dims = 48;
  double style_noise = 1.75;
  std::uint64_t data_seed = 1;

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
  SyntheticSpec synthetic_spec() const;
  /// Layer sizes of the encoders: ambient -> hidden -> hidden -> embed.
  std::vector<std::size_t> encoder_dims() const;

  bool operator==(const TrainConfig&) const = default;
};

/// The training set described by the config (drawn from data_seed).
std::vector<SyntheticInstance> make_training_set(const TrainConfig& config);

/// Freshly initialised encoder with the training architecture: tanh MLP,
/// one backbone layer, a two-layer projection head, l2-normalised output.
EncoderParams make_encoder(const TrainConfig& config, Rng& rng);

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double lr = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;         // learning rate of the epoch's last step
  double grad_norm = 0.0;  // mean over the epoch's steps
  std::size_t queue_size = 0;
  double wall_seconds = 0.0;
};

struct TrainingLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

/// What went wrong when a step produced a non-finite value.
struct DiagnosticRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::vector<std::size_t> instance_ids;
  double loss = 0.0;
  std::string message;
};

class TrainingAborted : public std::runtime_error {
 public:
  explicit TrainingAborted(DiagnosticRecord record)
      : std::runtime_error(record.message), record_(std::move(record)) {}
  const DiagnosticRecord& record() const { return record_; }

 private:
  DiagnosticRecord record_;
};

/// Everything needed to continue a run bit-exactly.
struct TrainingState {
  TrainConfig config;
  Method method = Method::kJcl;
  EncoderParams query_encoder;
  EncoderParams key_encoder;
  SgdOptimizer optimizer{0.9, 1e-4};
  NegativeQueue queue{1, 1};
  Rng rng;
  std::size_t epoch = 0;  // completed epochs
  std::size_t step = 0;   // completed steps
  TrainingLog log;
};

/// Momentum-encoder contrastive training on the synthetic task. Each step:
/// augment M'+1 views per instance (2 for InfoNCE), encode the query with
/// f and the keys with g, form per-instance key statistics, score against
/// the queue, update f by SGD, update g by momentum, enqueue the key means.
class Trainer {
 public:
  /// Fresh run. Initialises f, copies it into g and pre-fills the queue
  /// with random unit vectors, all from `rng`.
  Trainer(const TrainConfig& config, Method method, std::vector<SyntheticInstance> dataset, Rng rng);
  /// Resumes from a saved state.
  Trainer(TrainingState state, std::vector<SyntheticInstance> dataset);

  std::size_t steps_per_epoch() const;
  std::size_t total_steps() const;
  bool finished() const { return state_.epoch >= state_.config.epochs; }

  /// Runs one epoch. Throws TrainingAborted on a non-finite loss or gradient.
  const EpochRecord& run_epoch();
  void run();

  const TrainingState& state() const { return state_; }

 private:
  double train_step(const std::vector<std::size_t>& batch);

  TrainingState state_;
  std::vector<SyntheticInstance> dataset_;
};

struct TrainResult {
  EncoderParams encoder;
  TrainingLog log;
};

TrainResult train(const TrainConfig& config, const std::vector<SyntheticInstance>& dataset, Rng rng);
/// Same loop with the single-key InfoNCE objective.
TrainResult train_baseline(const TrainConfig& config, const std::vector<SyntheticInstance>& dataset,
                           Rng rng);

}  // namespace jcl

#endif  // JCL_TRAINER_HPP
