#include "jcl/probe.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jcl {
namespace {

std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Vector logits(const Matrix& w, const Vector& b, const Vector& x) {
  Vector z = mat_vec(w, x);
  for (std::size_t c = 0; c < z.size(); ++c) z[c] += b[c];
  return z;
}

double accuracy(const Matrix& w, const Vector& b, const std::vector<Vector>& x,
                const std::vector<std::size_t>& y) {
  if (x.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.size(); ++i) hits += argmax(logits(w, b, x[i])) == y[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(x.size());
}

}  // namespace

ProbeResult linear_probe(const std::vector<Vector>& train_x, const std::vector<std::size_t>& train_y,
                         const std::vector<Vector>& test_x, const std::vector<std::size_t>& test_y,
                         std::size_t classes, const ProbeConfig& cfg, Rng& rng) {
  if (train_x.empty() || train_x.size() != train_y.size() || test_x.size() != test_y.size()) {
    throw std::invalid_argument("linear_probe: malformed data");
  }
  if (classes == 0 || cfg.batch_size == 0) throw std::invalid_argument("linear_probe: bad configuration");
  const std::size_t dim = train_x.front().size();
  for (std::size_t y : train_y) {
    if (y >= classes) throw std::invalid_argument("linear_probe: label out of range");
  }

  Matrix w(classes, dim);
  Vector b(classes, 0.0);
  Matrix vw(classes, dim);
  Vector vb(classes, 0.0);
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.lr;
    if (epoch * 10 >= cfg.epochs * 6) lr *= 0.1;
    if (epoch * 10 >= cfg.epochs * 8) lr *= 0.1;
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      Matrix gw(classes, dim);
      Vector gb(classes, 0.0);
      for (std::size_t k = begin; k < end; ++k) {
        const Vector& x = train_x[order[k]];
        Vector z = logits(w, b, x);
        const double lse = log_sum_exp(z);
        for (std::size_t c = 0; c < classes; ++c) {
          const double p = std::exp(z[c] - lse) - (c == train_y[order[k]] ? 1.0 : 0.0);
          gb[c] += p * inv;
          auto row = gw.row(c);
          for (std::size_t a = 0; a < dim; ++a) row[a] += p * inv * x[a];
        }
      }
      for (std::size_t i = 0; i < w.data().size(); ++i) {
        vw.data()[i] = cfg.momentum * vw.data()[i] + gw.data()[i];
        w.data()[i] -= lr * vw.data()[i];
      }
      for (std::size_t c = 0; c < classes; ++c) {
        vb[c] = cfg.momentum * vb[c] + gb[c];
        b[c] -= lr * vb[c];
      }
    }
  }
  if (!all_finite(w.data()) || !all_finite(b)) throw NumericError("linear_probe: diverged");

  ProbeResult r;
  r.train_accuracy = accuracy(w, b, train_x, train_y);
  r.test_accuracy = accuracy(w, b, test_x, test_y);
  r.train_count = train_x.size();
  r.test_count = test_x.size();
  r.classes = classes;
  return r;
}

ProbeResult probe_encoder(const EncoderParams& encoder, const TrainConfig& config,
                          const ProbeConfig& cfg, Rng& rng) {
  if (encoder.input_dim() != config.ambient_dim) {
    throw std::invalid_argument("probe: encoder input does not match the dataset");
  }
  const std::vector<SyntheticInstance> train_set = make_training_set(config);
  const SyntheticGenerator gen(config.synthetic_spec());
  const std::vector<SyntheticInstance> test_set = gen.sample(cfg.test_instances, rng, train_set.size());

  std::vector<Vector> train_x;
  std::vector<std::size_t> train_y;
  for (const SyntheticInstance& inst : train_set) {
    for (const Vector& view : augment(inst, cfg.views_per_instance, rng)) {
      train_x.push_back(extract_features(encoder, view, cfg.tap));
      train_y.push_back(inst.label);
    }
  }
  std::vector<Vector> test_x;
  std::vector<std::size_t> test_y;
  for (const SyntheticInstance& inst : test_set) {
    test_x.push_back(extract_features(encoder, augment(inst, 1, rng).front(), cfg.tap));
    test_y.push_back(inst.label);
  }
  return linear_probe(train_x, train_y, test_x, test_y, config.clusters, cfg, rng);
}

}  // namespace jcl
