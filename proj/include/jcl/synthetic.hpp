#ifndef JCL_SYNTHETIC_HPP
#define JCL_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jcl/numerics.hpp"

namespace jcl {

/// One source sample of the instance-discrimination task. Its views are
/// gain * base + noise_scale * N(0, I), gain ~ U[1 - gain_jitter, 1 + gain_jitter],
/// except the trailing `style_dims` coordinates, which every view redraws
/// as style_noise * N(0, 1) (nuisance the encoder should become invariant to).
struct SyntheticInstance {
  std::size_t id = 0;
  std::size_t label = 0;  // latent cluster
  Vector base;
  double noise_scale = 0.0;
  double gain_jitter = 0.0;
  std::size_t style_dims = 0;
  double style_noise = 0.0;
};

struct SyntheticSpec {
  std::size_t ambient_dim = 64;
  std::size_t clusters = 10;
  /// Norm of the instance-specific offset relative to the unit cluster centre.
  double cluster_spread = 1.0;
  double noise_scale = 0.1;
  double gain_jitter = 0.2;
  std::size_t style_dims = 0;
  double style_noise = 0.0;
  std::uint64_t seed = 1;
};

/// Fixed cluster centres (drawn from spec.seed) from which any number of
/// instances can be sampled.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(const SyntheticSpec& spec);

  const SyntheticSpec& spec() const { return spec_; }
  const std::vector<Vector>& centers() const { return centers_; }
  std::size_t content_dim() const { return spec_.ambient_dim - spec_.style_dims; }

  /// Instances whose content part lies on the unit sphere (style part zero);
  /// labels cycle through the clusters so every cluster is equally
  /// represented. Ids start at `first_id`.
  std::vector<SyntheticInstance> sample(std::size_t count, Rng& rng, std::size_t first_id = 0) const;

 private:
  SyntheticSpec spec_;
  std::vector<Vector> centers_;
};

/// `count` i.i.d. augmented views of one instance.
std::vector<Vector> augment(const SyntheticInstance& inst, std::size_t count, Rng& rng);

}  // namespace jcl

#endif  // JCL_SYNTHETIC_HPP
