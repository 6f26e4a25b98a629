#include "jcl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jcl/key_statistics.hpp"

namespace jcl {

HistogramReport make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("make_histogram: bad range or bin count");
  HistogramReport h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.counts.assign(bins, 0);
  double sum = 0.0;
  for (double v : values) {
    const double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    const auto bin = static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[bin];
    sum += v;
  }
  h.count = values.size();
  if (h.count > 0) {
    h.mean = sum / static_cast<double>(h.count);
    double ss = 0.0;
    for (double v : values) ss += (v - h.mean) * (v - h.mean);
    h.std = std::sqrt(ss / static_cast<double>(h.count));
  }
  return h;
}

double mean_pairwise_similarity(const std::vector<Vector>& features) {
  if (features.empty()) throw std::invalid_argument("mean_pairwise_similarity: no features");
  double s = 0.0;
  for (const Vector& a : features) {
    for (const Vector& b : features) s += dot(a, b);
  }
  const double n = static_cast<double>(features.size());
  return s / (n * n);
}

double mean_feature_variance(const std::vector<Vector>& features) {
  const PositiveKeyStats stats = compute_covariance(features);
  return stats.sigma.trace() / static_cast<double>(stats.mu.size());
}

FeatureAnalysis analyze_features(const EncoderParams& encoder, const SyntheticGenerator& generator,
                                 std::size_t instances, std::size_t augmentations, FeatureTap tap,
                                 std::size_t bins, Rng& rng) {
  if (instances == 0 || augmentations == 0) {
    throw std::invalid_argument("analyze_features: instances and augmentations must be positive");
  }
  if (encoder.input_dim() != generator.spec().ambient_dim) {
    throw std::invalid_argument("analyze_features: encoder does not match the data model");
  }
  FeatureAnalysis out;
  const std::vector<SyntheticInstance> sample = generator.sample(instances, rng);
  for (const SyntheticInstance& inst : sample) {
    std::vector<Vector> feats;
    feats.reserve(augmentations);
    for (const Vector& view : augment(inst, augmentations, rng)) {
      feats.push_back(extract_features(encoder, view, tap));
    }
    out.feature_dim = feats.front().size();
    out.similarity_points.push_back(mean_pairwise_similarity(feats));
    out.variance_points.push_back(mean_feature_variance(feats));
  }
  out.similarity = make_histogram(out.similarity_points, -1.0, 1.0, bins);
  // Unit features have total variance <= 1, so the per-dimension mean is <= 1/D.
  out.variance = make_histogram(out.variance_points, 0.0, 1.0 / static_cast<double>(out.feature_dim), bins);
  return out;
}

}  // namespace jcl
