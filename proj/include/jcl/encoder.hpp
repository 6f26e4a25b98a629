#ifndef JCL_ENCODER_HPP
#define JCL_ENCODER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "jcl/numerics.hpp"

namespace jcl {

enum class Activation { kRelu, kTanh, kIdentity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out

  bool operator==(const DenseLayer&) const = default;
};

/// A plain MLP. The activation follows every layer except the last. The
/// first `backbone_layers` layers form the backbone whose output is the
/// pre-projection feature; the remaining layers are the projection head.
struct EncoderParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::kRelu;
  bool normalize_output = true;
  std::size_t backbone_layers = 1;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  bool same_shape(const EncoderParams& other) const;
  /// Zero-valued parameters of the same architecture (gradient container).
  EncoderParams zeros_like() const;
  double squared_norm() const;

  bool operator==(const EncoderParams&) const = default;
};

/// Which representation to read out of an encoder.
enum class FeatureTap { kBackbone, kProjection };

std::string to_string(FeatureTap t);
FeatureTap feature_tap_from_string(const std::string& s);

/// Layer sizes {in, h1, ..., out}; weights uniform in +-1/sqrt(fan_in).
EncoderParams init_encoder(const std::vector<std::size_t>& dims, Activation activation,
                           std::size_t backbone_layers, bool normalize_output, Rng& rng);

/// Intermediate values retained for backpropagation.
struct ForwardCache {
  std::vector<Vector> inputs;  // input to each layer
  std::vector<Vector> pre;     // pre-activation output of each layer
  Vector raw;                  // final unnormalised output
  Vector output;               // normalised if requested
  double raw_norm = 0.0;
};

ForwardCache forward(const EncoderParams& params, std::span<const double> x);
Vector encode(const EncoderParams& params, std::span<const double> x);
/// Backbone output (l2-normalised) or the encoder output, per `tap`.
Vector extract_features(const EncoderParams& params, std::span<const double> x, FeatureTap tap);

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
void backward(const EncoderParams& params, const ForwardCache& cache,
              std::span<const double> grad_output, EncoderParams& grads);

/// theta_k <- m * theta_k + (1 - m) * theta_q for every parameter.
EncoderParams momentum_update(const EncoderParams& key, const EncoderParams& query, double m);

}  // namespace jcl

#endif  // JCL_ENCODER_HPP
