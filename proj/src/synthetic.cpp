#include "jcl/synthetic.hpp"

#include <algorithm>
#include <stdexcept>

namespace jcl {

SyntheticGenerator::SyntheticGenerator(const SyntheticSpec& spec) : spec_(spec) {
  if (spec.ambient_dim == 0 || spec.clusters == 0) {
    throw std::invalid_argument("SyntheticGenerator: ambient_dim and clusters must be positive");
  }
  if (spec.style_dims >= spec.ambient_dim) {
    throw std::invalid_argument("SyntheticGenerator: style_dims must leave at least one content dimension");
  }
  Rng rng(spec.seed);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    centers_.push_back(l2_normalize(rng.normal_vector(content_dim())));
  }
}

std::vector<SyntheticInstance> SyntheticGenerator::sample(std::size_t count, Rng& rng,
                                                          std::size_t first_id) const {
  std::vector<SyntheticInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticInstance inst;
    inst.id = first_id + i;
    inst.label = i % spec_.clusters;
    const Vector offset = l2_normalize(rng.normal_vector(content_dim()));
    Vector content = centers_[inst.label];
    for (std::size_t a = 0; a < content.size(); ++a) content[a] += spec_.cluster_spread * offset[a];
    inst.base = l2_normalize(content);
    inst.base.resize(spec_.ambient_dim, 0.0);
    inst.noise_scale = spec_.noise_scale;
    inst.gain_jitter = spec_.gain_jitter;
    inst.style_dims = spec_.style_dims;
    inst.style_noise = spec_.style_noise;
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Vector> augment(const SyntheticInstance& inst, std::size_t count, Rng& rng) {
  std::vector<Vector> views;
  views.reserve(count);
  for (std::size_t v = 0; v < count; ++v) {
    const double gain = inst.gain_jitter > 0.0
                            ? rng.uniform(1.0 - inst.gain_jitter, 1.0 + inst.gain_jitter)
                            : 1.0;
    Vector x = inst.base;
    const std::size_t content = x.size() - std::min(inst.style_dims, x.size());
    for (std::size_t a = 0; a < content; ++a) {
      x[a] *= gain;
      if (inst.noise_scale > 0.0) x[a] += inst.noise_scale * rng.normal();
    }
    for (std::size_t a = content; a < x.size(); ++a) {
      x[a] = inst.style_noise > 0.0 ? inst.style_noise * rng.normal() : 0.0;
    }
    views.push_back(std::move(x));
  }
  return views;
}

}  // namespace jcl
