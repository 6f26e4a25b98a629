#include "jcl/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace jcl {
namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kIdentity:
      return x;
  }
  return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre) {
  switch (a) {
    case Activation::kRelu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

Vector dense(const DenseLayer& layer, std::span<const double> x) {
  if (layer.weight.cols() != x.size()) throw std::invalid_argument("encoder: input dimension mismatch");
  Vector out = mat_vec(layer.weight, x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += layer.bias[i];
  return out;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "relu";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(FeatureTap t) { return t == FeatureTap::kBackbone ? "backbone" : "projection"; }

FeatureTap feature_tap_from_string(const std::string& s) {
  if (s == "backbone") return FeatureTap::kBackbone;
  if (s == "projection") return FeatureTap::kProjection;
  throw std::invalid_argument("unknown feature tap: " + s);
}

std::size_t EncoderParams::input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

std::size_t EncoderParams::output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += l.weight.data().size() + l.bias.size();
  return n;
}

bool EncoderParams::same_shape(const EncoderParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
        layers[i].weight.cols() != other.layers[i].weight.cols() ||
        layers[i].bias.size() != other.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z = *this;
  for (DenseLayer& l : z.layers) {
    std::fill(l.weight.data().begin(), l.weight.data().end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return z;
}

double EncoderParams::squared_norm() const {
  double s = 0.0;
  for (const DenseLayer& l : layers) {
    s += dot(l.weight.data(), l.weight.data());
    s += dot(l.bias, l.bias);
  }
  return s;
}

EncoderParams init_encoder(const std::vector<std::size_t>& dims, Activation activation,
                           std::size_t backbone_layers, bool normalize_output, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("init_encoder: need at least input and output sizes");
  EncoderParams p;
  p.activation = activation;
  p.normalize_output = normalize_output;
  p.backbone_layers = backbone_layers;
  if (backbone_layers > dims.size() - 1) throw std::invalid_argument("init_encoder: backbone deeper than network");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer layer{Matrix(dims[i + 1], dims[i]), Vector(dims[i + 1])};
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

ForwardCache forward(const EncoderParams& params, std::span<const double> x) {
  if (params.layers.empty()) throw std::invalid_argument("encoder has no layers");
  ForwardCache cache;
  Vector h(x.begin(), x.end());
  const std::size_t n = params.layers.size();
  for (std::size_t l = 0; l < n; ++l) {
    Vector pre = dense(params.layers[l], h);
    cache.inputs.push_back(std::move(h));
    h = pre;
    if (l + 1 < n) {
      for (double& v : h) v = activate(params.activation, v);
    }
    cache.pre.push_back(std::move(pre));
  }
  if (!all_finite(h)) throw NumericError("encoder: non-finite activations");
  cache.raw = std::move(h);
  cache.raw_norm = norm2(cache.raw);
  cache.output = params.normalize_output ? l2_normalize(cache.raw) : cache.raw;
  return cache;
}

Vector encode(const EncoderParams& params, std::span<const double> x) {
  return forward(params, x).output;
}

Vector extract_features(const EncoderParams& params, std::span<const double> x, FeatureTap tap) {
  if (tap == FeatureTap::kProjection) return l2_normalize(encode(params, x));
  Vector h(x.begin(), x.end());
  const std::size_t n = params.layers.size();
  for (std::size_t l = 0; l < params.backbone_layers; ++l) {
    h = dense(params.layers[l], h);
    if (l + 1 < n) {
      for (double& v : h) v = activate(params.activation, v);
    }
  }
  if (!all_finite(h)) throw NumericError("encoder: non-finite activations");
  return l2_normalize(h);
}

void backward(const EncoderParams& params, const ForwardCache& cache,
              std::span<const double> grad_output, EncoderParams& grads) {
  const std::size_t n = params.layers.size();
  Vector g(grad_output.begin(), grad_output.end());
  if (params.normalize_output) {
    // d(r/|r|)/dr applied to g: (g - y (y.g)) / |r|
    const double yg = dot(cache.output, g);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - cache.output[i] * yg) / cache.raw_norm;
  }
  for (std::size_t l = n; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    DenseLayer& acc = grads.layers[l];
    if (l + 1 < n) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= activate_grad(params.activation, cache.pre[l][i]);
    }
    const Vector& in = cache.inputs[l];
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      acc.bias[r] += g[r];
      auto row = acc.weight.row(r);
      for (std::size_t c = 0; c < in.size(); ++c) row[c] += g[r] * in[c];
    }
    if (l == 0) break;
    Vector prev(layer.weight.cols(), 0.0);
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      const auto row = layer.weight.row(r);
      for (std::size_t c = 0; c < prev.size(); ++c) prev[c] += row[c] * g[r];
    }
    g = std::move(prev);
  }
}

EncoderParams momentum_update(const EncoderParams& key, const EncoderParams& query, double m) {
  if (!key.same_shape(query)) throw std::invalid_argument("momentum_update: architecture mismatch");
  if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("momentum_update: m must lie in [0, 1]");
  EncoderParams out = key;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    auto& w = out.layers[l].weight.data();
    const auto& wq = query.layers[l].weight.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = m * w[i] + (1.0 - m) * wq[i];
    auto& b = out.layers[l].bias;
    const auto& bq = query.layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = m * b[i] + (1.0 - m) * bq[i];
  }
  return out;
}

}  // namespace jcl
