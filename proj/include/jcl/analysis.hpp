#ifndef JCL_ANALYSIS_HPP
#define JCL_ANALYSIS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "jcl/encoder.hpp"
#include "jcl/synthetic.hpp"

namespace jcl {

struct HistogramReport {
  std::vector<double> edges;         // bins + 1 edges
  std::vector<std::size_t> counts;   // bins
  double mean = 0.0;
  double std = 0.0;                  // population standard deviation
  std::size_t count = 0;
};

/// Equal-width bins over [lo, hi]; values at hi land in the last bin,
/// values outside the range are clamped into the end bins.
HistogramReport make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

/// Mean cosine similarity over all ordered pairs of views, self-pairs
/// included. Features must be l2-normalised.
double mean_pairwise_similarity(const std::vector<Vector>& features);
/// Mean of the diagonal of the biased (1/M) covariance of the views.
double mean_feature_variance(const std::vector<Vector>& features);

struct FeatureAnalysis {
  std::vector<double> similarity_points;
  std::vector<double> variance_points;
  HistogramReport similarity;  // over [-1, 1]
  HistogramReport variance;    // over [0, 1/D]
  std::size_t feature_dim = 0;
};

/// Draws `instances` fresh instances from `generator`, encodes
/// `augmentations` views each and reduces every instance to one
/// similarity point and one variance point.
FeatureAnalysis analyze_features(const EncoderParams& encoder, const SyntheticGenerator& generator,
                                 std::size_t instances, std::size_t augmentations, FeatureTap tap,
                                 std::size_t bins, Rng& rng);

}  // namespace jcl

#endif  // JCL_ANALYSIS_HPP
