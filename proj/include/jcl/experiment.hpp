#ifndef JCL_EXPERIMENT_HPP
#define JCL_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jcl/analysis.hpp"
#include "jcl/losses.hpp"
#include "jcl/probe.hpp"
#include "jcl/trainer.hpp"

namespace jcl {

/// printf("%.17g"): round-trips every double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Randomised loss instances and property checks
// ---------------------------------------------------------------------------

struct RandomInstanceOptions {
  std::size_t min_dim = 1;
  std::size_t max_dim = 16;
  std::size_t max_negatives = 32;
  std::size_t min_negatives = 1;
  double max_lambda = 4.0;
  double min_tau = 0.1;
  double max_tau = 1.0;
  bool zero_sigma = false;
};

struct RandomInstance {
  ContrastiveInstance instance;
  LossParams params;
};

/// Unit query and negatives; the positive statistics come either from a
/// cluster of unit keys or from a random low-rank PSD matrix.
RandomInstance random_instance(Rng& rng, const RandomInstanceOptions& opts = {});

/// The worked overflow-regime case: q = mu = e1, Sigma = I, lambda = 4,
/// tau = 0.2, one orthogonal negative. Loss = 50 + log(1 + e^-55).
RandomInstance worked_example();

/// Central differences of jcl_loss along every coordinate of the query.
Vector finite_difference_gradient(const ContrastiveInstance& inst, const LossParams& params,
                                  double h = 1e-6);
/// |g - g_fd| / max(|g|, |g_fd|), Euclidean norms; 0 when both vanish.
double gradient_relative_error(const ContrastiveInstance& inst, const LossParams& params,
                               double h = 1e-6);

struct SuiteResult {
  std::string suite;
  std::size_t trials = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  /// Jensen: smallest (bound + 3 se - mc). Monotonicity: smallest signed
  /// finite difference in the required direction. Others: largest error.
  double worst_margin = 0.0;
};

struct VerifyBoundOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t mc_samples = 100000;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool all_passed() const;
  std::string to_csv() const;
};

/// Jensen bound, tightness, reduction, gradient and monotonicity suites.
VerifyReport run_verify_bound(const VerifyBoundOptions& opts);

// ---------------------------------------------------------------------------
// Commands with on-disk artifacts
// ---------------------------------------------------------------------------

std::string train_log_csv(const TrainingLog& log);
std::string step_log_csv(const TrainingLog& log);
std::string timing_csv(const TrainingLog& log);
std::string histogram_csv(const HistogramReport& h);

/// Resolved experiment description written next to every output.
nlohmann::json experiment_spec_json(const std::string& command, const nlohmann::json& args);

/// Trains and, when `out_dir` is set, writes spec.json, checkpoint.json,
/// train_log.csv, steps.csv and timing.csv there. On abort writes
/// diagnostic.json and rethrows.
TrainingState run_train(const TrainConfig& config, Method method,
                        const std::optional<std::filesystem::path>& out_dir);

std::string probe_csv(const ProbeResult& r, const std::string& method, FeatureTap tap, std::uint64_t seed);

ProbeResult run_probe(const TrainingState& checkpoint, std::uint64_t seed, const ProbeConfig& cfg);

enum class SweepParam { kPositiveKeys, kLambda, kTau };
std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s);
/// Copy of `base` with `param` set to `value` (integral for M').
TrainConfig apply_sweep_value(TrainConfig base, SweepParam param, double value);

struct SweepRow {
  double value = 0.0;
  double probe_accuracy = 0.0;
  double final_loss = 0.0;
  bool ok = false;
  std::string error;
};

/// Train + probe for every value; a failing value yields a row marked failed.
std::vector<SweepRow> run_sweep(SweepParam param, const std::vector<double>& values,
                                const TrainConfig& base, Method method, std::uint64_t probe_seed,
                                const ProbeConfig& probe_cfg,
                                const std::optional<std::filesystem::path>& out_dir);
std::string sweep_csv(SweepParam param, const std::vector<SweepRow>& rows);

FeatureAnalysis run_analyze_features(const TrainingState& checkpoint, std::size_t instances,
                                     std::size_t augmentations, std::uint64_t seed, FeatureTap tap,
                                     std::size_t bins);
std::string feature_summary_csv(const FeatureAnalysis& a);

}  // namespace jcl

#endif  // JCL_EXPERIMENT_HPP
