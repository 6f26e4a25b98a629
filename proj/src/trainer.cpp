#include "jcl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "jcl/key_statistics.hpp"

namespace jcl {

std::string to_string(Method m) {
  switch (m) {
    case Method::kJcl:
      return "jcl";
    case Method::kInfoNce:
      return "infonce";
    case Method::kVanilla:
      return "vanilla";
  }
  return "jcl";
}

Method method_from_string(const std::string& s) {
  if (s == "jcl") return Method::kJcl;
  if (s == "infonce") return Method::kInfoNce;
  if (s == "vanilla") return Method::kVanilla;
  throw std::invalid_argument("unknown method: " + s);
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
  };
  require(batch_size >= 1, "batch_size >= 1");
  require(positive_keys >= 1, "positive_keys >= 1");
  require(tau > 0.0 && std::isfinite(tau), "tau > 0");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda >= 0");
  require(momentum >= 0.0 && momentum <= 1.0, "0 <= momentum <= 1");
  require(queue_capacity >= batch_size, "queue_capacity >= batch_size");
  require(embed_dim >= 1 && hidden_dim >= 1 && ambient_dim >= 1, "dimensions >= 1");
  require(lr >= 0.0 && std::isfinite(lr), "lr >= 0");
  require(sgd_momentum >= 0.0 && sgd_momentum < 1.0, "0 <= sgd_momentum < 1");
  require(weight_decay >= 0.0, "weight_decay >= 0");
  require(epochs >= 1, "epochs >= 1");
  require(instances >= 1, "instances >= 1");
  require(clusters >= 1, "clusters >= 1");
  require(cluster_spread >= 0.0, "cluster_spread >= 0");
  require(aug_noise >= 0.0, "aug_noise >= 0");
  require(aug_gain >= 0.0 && aug_gain < 1.0, "0 <= aug_gain < 1");
  require(style_dims < ambient_dim, "style_dims < ambient_dim");
  require(style_noise >= 0.0, "style_noise >= 0");
}

SyntheticSpec TrainConfig::synthetic_spec() const {
  SyntheticSpec s;
  s.ambient_dim = ambient_dim;
  s.clusters = clusters;
  s.cluster_spread = cluster_spread;
  s.noise_scale = aug_noise;
  s.gain_jitter = aug_gain;
  s.style_dims = style_dims;
  s.style_noise = style_noise;
  s.seed = data_seed;
  return s;
}

std::vector<std::size_t> TrainConfig::encoder_dims() const {
  return {ambient_dim, hidden_dim, hidden_dim, embed_dim};
}

std::vector<SyntheticInstance> make_training_set(const TrainConfig& config) {
  const SyntheticGenerator gen(config.synthetic_spec());
  // Distinct stream from the one that drew the cluster centres.
  Rng rng(config.data_seed ^ 0x9e3779b97f4a7c15ULL);
  return gen.sample(config.instances, rng);
}

EncoderParams make_encoder(const TrainConfig& config, Rng& rng) {
  return init_encoder(config.encoder_dims(), Activation::kTanh, 1, true, rng);
}

Trainer::Trainer(const TrainConfig& config, Method method, std::vector<SyntheticInstance> dataset,
                 Rng rng)
    : dataset_(std::move(dataset)) {
  config.validate();
  if (dataset_.empty()) throw std::invalid_argument("Trainer: empty dataset");
  if (dataset_.front().base.size() != config.ambient_dim) {
    throw std::invalid_argument("Trainer: dataset dimension does not match ambient_dim");
  }
  state_.config = config;
  state_.method = method;
  state_.rng = std::move(rng);
  state_.query_encoder = make_encoder(config, state_.rng);
  state_.key_encoder = state_.query_encoder;
  state_.optimizer = SgdOptimizer(config.sgd_momentum, config.weight_decay);
  state_.queue = NegativeQueue(config.queue_capacity, config.embed_dim);
  std::vector<Vector> init;
  init.reserve(config.queue_capacity);
  for (std::size_t i = 0; i < config.queue_capacity; ++i) {
    init.push_back(l2_normalize(state_.rng.normal_vector(config.embed_dim)));
  }
  state_.queue.push(init);
}

Trainer::Trainer(TrainingState state, std::vector<SyntheticInstance> dataset)
    : state_(std::move(state)), dataset_(std::move(dataset)) {
  state_.config.validate();
  if (dataset_.empty()) throw std::invalid_argument("Trainer: empty dataset");
}

std::size_t Trainer::steps_per_epoch() const {
  const std::size_t n = dataset_.size();
  const std::size_t b = state_.config.batch_size;
  return (n + b - 1) / b;
}

std::size_t Trainer::total_steps() const { return steps_per_epoch() * state_.config.epochs; }

double Trainer::train_step(const std::vector<std::size_t>& batch) {
  const TrainConfig& cfg = state_.config;
  const double lr = cosine_lr(state_.step, total_steps(), cfg.lr);
  const NegativeKeys negatives = make_negatives(state_.queue.snapshot());
  const LossParams params{cfg.tau, cfg.lambda};
  const std::size_t n_keys = state_.method == Method::kInfoNce ? 1 : cfg.positive_keys;
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  DiagnosticRecord diag;
  diag.epoch = state_.epoch;
  diag.step = state_.step;
  for (std::size_t idx : batch) diag.instance_ids.push_back(dataset_[idx].id);

  std::vector<ForwardCache> caches;
  std::vector<Vector> means;
  std::vector<Vector> grads_q;
  double loss = 0.0;
  try {
    std::vector<ContrastiveInstance> jcl_batch;
    std::vector<LossResult> per_instance;
    for (std::size_t idx : batch) {
      const std::vector<Vector> views = augment(dataset_[idx], n_keys + 1, state_.rng);
      caches.push_back(forward(state_.query_encoder, views[0]));
      const Vector& q = caches.back().output;
      std::vector<Vector> keys;
      keys.reserve(n_keys);
      for (std::size_t v = 1; v < views.size(); ++v) keys.push_back(encode(state_.key_encoder, views[v]));

      switch (state_.method) {
        case Method::kJcl: {
          PositiveKeyStats stats = compute_covariance(keys);
          if (!stats_psd_check(stats)) {
            throw NumericError("positive-key covariance failed the PSD check");
          }
          means.push_back(stats.mu);
          jcl_batch.push_back({q, std::move(stats), negatives});
          break;
        }
        case Method::kInfoNce:
          per_instance.push_back(pair_loss_with_grad(q, keys[0], *negatives, cfg.tau));
          means.push_back(compute_mean(keys));
          break;
        case Method::kVanilla:
          per_instance.push_back(vanilla_multi_key_loss_with_grad(q, keys, *negatives, cfg.tau));
          means.push_back(compute_mean(keys));
          break;
      }
    }

    if (state_.method == Method::kJcl) {
      BatchLoss bl = jcl_batch_loss(jcl_batch, params);
      loss = bl.value;
      grads_q = std::move(bl.grads);
    } else {
      // Same reduction as jcl_batch_loss so the objectives agree bitwise
      // whenever they coincide mathematically.
      double total = 0.0;
      for (LossResult& r : per_instance) {
        total += r.value;
        for (double& g : r.grad_query) g *= inv_n;
        grads_q.push_back(std::move(r.grad_query));
      }
      loss = total * inv_n;
    }
  } catch (const std::exception& e) {
    diag.loss = loss;
    diag.message = std::string("training aborted: ") + e.what();
    throw TrainingAborted(std::move(diag));
  }
  if (!std::isfinite(loss)) {
    diag.loss = loss;
    diag.message = "training aborted: non-finite loss";
    throw TrainingAborted(std::move(diag));
  }

  EncoderParams grads = state_.query_encoder.zeros_like();
  for (std::size_t i = 0; i < caches.size(); ++i) backward(state_.query_encoder, caches[i], grads_q[i], grads);
  const double grad_norm = std::sqrt(grads.squared_norm());
  if (!std::isfinite(grad_norm)) {
    diag.loss = loss;
    diag.message = "training aborted: non-finite gradient";
    throw TrainingAborted(std::move(diag));
  }

  state_.optimizer.step(state_.query_encoder, grads, lr);
  state_.key_encoder = momentum_update(state_.key_encoder, state_.query_encoder, cfg.momentum);
  state_.queue.push(means);

  state_.log.steps.push_back({state_.epoch, state_.step, loss, grad_norm, lr});
  ++state_.step;
  return loss;
}

const EpochRecord& Trainer::run_epoch() {
  if (finished()) throw std::logic_error("Trainer::run_epoch: training already finished");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> order(dataset_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  state_.rng.shuffle(order);

  const std::size_t b = state_.config.batch_size;
  double loss_sum = 0.0;
  double grad_sum = 0.0;
  std::size_t steps = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += b) {
    const std::size_t end = std::min(order.size(), begin + b);
    const std::vector<std::size_t> batch(order.begin() + begin, order.begin() + end);
    loss_sum += train_step(batch);
    grad_sum += state_.log.steps.back().grad_norm;
    ++steps;
  }

  EpochRecord rec;
  rec.epoch = state_.epoch;
  rec.mean_loss = loss_sum / static_cast<double>(steps);
  rec.grad_norm = grad_sum / static_cast<double>(steps);
  rec.lr = state_.log.steps.back().lr;
  rec.queue_size = state_.queue.size();
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  state_.log.epochs.push_back(rec);
  ++state_.epoch;
  return state_.log.epochs.back();
}

void Trainer::run() {
  while (!finished()) run_epoch();
}

TrainResult train(const TrainConfig& config, const std::vector<SyntheticInstance>& dataset, Rng rng) {
  Trainer t(config, Method::kJcl, dataset, std::move(rng));
  t.run();
  return {t.state().query_encoder, t.state().log};
}

TrainResult train_baseline(const TrainConfig& config, const std::vector<SyntheticInstance>& dataset,
                           Rng rng) {
  Trainer t(config, Method::kInfoNce, dataset, std::move(rng));
  t.run();
  return {t.state().query_encoder, t.state().log};
}

}  // namespace jcl
