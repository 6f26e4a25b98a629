#include "jcl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jcl/checkpoint.hpp"

namespace jcl {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

RandomInstance random_instance(Rng& rng, const RandomInstanceOptions& opts) {
  if (opts.min_dim == 0 || opts.min_dim > opts.max_dim || opts.min_negatives > opts.max_negatives) {
    throw std::invalid_argument("random_instance: empty dimension or negative range");
  }
  const std::size_t d = opts.min_dim + rng.index(opts.max_dim - opts.min_dim + 1);
  const std::size_t k = opts.min_negatives + rng.index(opts.max_negatives - opts.min_negatives + 1);
  RandomInstance out;
  out.params.lambda = rng.uniform(0.0, opts.max_lambda);
  out.params.tau = rng.uniform(opts.min_tau, opts.max_tau);
  out.instance.query = l2_normalize(rng.normal_vector(d));

  PositiveKeyStats& st = out.instance.pos_stats;
  if (opts.zero_sigma) {
    st.mu = l2_normalize(rng.normal_vector(d));
    st.sigma = Matrix(d, d);
    st.count = 1;
  } else if (rng.uniform() < 0.5) {
    // Statistics of a cluster of unit keys, as the trainer produces them.
    const Vector dir = l2_normalize(rng.normal_vector(d));
    const double spread = rng.uniform(0.05, 1.0);
    const std::size_t m = 2 + rng.index(11);
    std::vector<Vector> keys;
    for (std::size_t i = 0; i < m; ++i) {
      Vector key = dir;
      const Vector noise = rng.normal_vector(d);
      for (std::size_t a = 0; a < d; ++a) key[a] += spread * noise[a] / std::sqrt(static_cast<double>(d));
      keys.push_back(l2_normalize(key));
    }
    st = compute_covariance(keys);
  } else {
    // Random low-rank PSD covariance B B^T.
    const std::size_t r = 1 + rng.index(d);
    const double scale = rng.uniform(0.0, 1.0) / static_cast<double>(r * d);
    Matrix b(d, r);
    for (double& x : b.data()) x = rng.normal();
    st.mu = l2_normalize(rng.normal_vector(d));
    st.sigma = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        st.sigma(i, j) = scale * dot(b.row(i), b.row(j));
        st.sigma(j, i) = st.sigma(i, j);
      }
    }
    st.count = r;
  }

  std::vector<Vector> negatives;
  for (std::size_t j = 0; j < k; ++j) negatives.push_back(l2_normalize(rng.normal_vector(d)));
  out.instance.negatives = make_negatives(negatives, d);
  return out;
}

RandomInstance worked_example() {
  RandomInstance w;
  w.instance.query = {1.0, 0.0};
  w.instance.pos_stats.mu = {1.0, 0.0};
  w.instance.pos_stats.sigma = Matrix::identity(2);
  w.instance.pos_stats.count = 2;
  w.instance.negatives = make_negatives({{0.0, 1.0}}, 2);
  w.params = {0.2, 4.0};
  return w;
}

Vector finite_difference_gradient(const ContrastiveInstance& inst, const LossParams& params, double h) {
  Vector g(inst.query.size());
  ContrastiveInstance probe = inst;
  for (std::size_t a = 0; a < g.size(); ++a) {
    probe.query = inst.query;
    probe.query[a] = inst.query[a] + h;
    const double up = jcl_loss(probe, params).value;
    probe.query[a] = inst.query[a] - h;
    const double down = jcl_loss(probe, params).value;
    g[a] = (up - down) / (2.0 * h);
  }
  return g;
}

double gradient_relative_error(const ContrastiveInstance& inst, const LossParams& params, double h) {
  const Vector analytic = jcl_loss(inst, params).grad_query;
  const Vector numeric = finite_difference_gradient(inst, params, h);
  Vector diff(analytic.size());
  for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = analytic[a] - numeric[a];
  const double denom = std::max(norm2(analytic), norm2(numeric));
  if (denom == 0.0) return 0.0;
  return norm2(diff) / denom;
}

// ---------------------------------------------------------------------------
// verify-bound
// ---------------------------------------------------------------------------

bool VerifyReport::all_passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.failed == 0; });
}

std::string VerifyReport::to_csv() const {
  std::ostringstream os;
  os << "suite,trials,passed,failed,worst_margin\n";
  for (const SuiteResult& s : suites) {
    os << s.suite << ',' << s.trials << ',' << s.passed << ',' << s.failed << ','
       << format_double(s.worst_margin) << '\n';
  }
  return os.str();
}

namespace {

void record(SuiteResult& s, bool ok) {
  ++s.trials;
  ok ? ++s.passed : ++s.failed;
}

SuiteResult jensen_suite(const VerifyBoundOptions& o, Rng& rng) {
  SuiteResult s{"jensen_bound", 0, 0, 0, std::numeric_limits<double>::infinity()};
  for (std::size_t t = 0; t < o.trials; ++t) {
    const RandomInstance ri = random_instance(rng);
    const McEstimate mc = monte_carlo_inf_loss(ri.instance, ri.params, o.mc_samples, rng);
    const double bound = jcl_loss(ri.instance, ri.params).value;
    const double margin = bound + 3.0 * mc.std_err - mc.mean;
    s.worst_margin = std::min(s.worst_margin, margin);
    record(s, margin >= 0.0);
  }
  return s;
}

SuiteResult tightness_suite(const VerifyBoundOptions& o, Rng& rng) {
  SuiteResult s{"tightness", 0, 0, 0, 0.0};
  RandomInstanceOptions opts;
  opts.zero_sigma = true;
  for (std::size_t t = 0; t < o.trials; ++t) {
    const RandomInstance ri = random_instance(rng, opts);
    const McEstimate mc = monte_carlo_inf_loss(ri.instance, ri.params, 100, rng);
    const double err = std::abs(mc.mean - jcl_loss(ri.instance, ri.params).value);
    s.worst_margin = std::max(s.worst_margin, err);
    record(s, err <= 1e-12 && mc.std_err == 0.0);
  }
  return s;
}

SuiteResult reduction_suite(const VerifyBoundOptions& o, Rng& rng) {
  SuiteResult s{"reduction", 0, 0, 0, 0.0};
  for (std::size_t t = 0; t < o.trials; ++t) {
    RandomInstance ri = random_instance(rng);
    ri.params.lambda = 0.0;
    const double closed = jcl_loss(ri.instance, ri.params).value;
    const double pair =
        pair_loss(ri.instance.query, ri.instance.pos_stats.mu, *ri.instance.negatives, ri.params.tau);
    const double err = std::abs(closed - pair) / std::max(std::abs(pair), std::numeric_limits<double>::min());
    s.worst_margin = std::max(s.worst_margin, closed == pair ? 0.0 : err);
    record(s, closed == pair || err <= 1e-12);
  }
  return s;
}

SuiteResult gradient_suite(const VerifyBoundOptions& o, Rng& rng) {
  SuiteResult s{"gradient_check", 0, 0, 0, 0.0};
  // With d = 1 the unit query is +-1 and the gradient can cancel to ~1e-8,
  // below what central differences at h = 1e-6 resolve.
  RandomInstanceOptions opts;
  opts.min_dim = 2;
  for (std::size_t t = 0; t < o.trials; ++t) {
    const RandomInstance ri = t == 0 ? worked_example() : random_instance(rng, opts);
    const double err = gradient_relative_error(ri.instance, ri.params, 1e-6);
    s.worst_margin = std::max(s.worst_margin, err);
    record(s, err < 1e-5);
  }
  return s;
}

SuiteResult monotonicity_suite(const VerifyBoundOptions& o, Rng& rng) {
  SuiteResult s{"monotonicity", 0, 0, 0, std::numeric_limits<double>::infinity()};
  const double eps = 1e-3;
  for (std::size_t t = 0; t < o.trials; ++t) {
    // Points where exp(a + c) and the negative mass are within e^10 of each
    // other, so every partial derivative is resolvable in double precision.
    const double a = rng.uniform(-20.0, 20.0);
    const double c = rng.uniform(0.0, 30.0);
    const double mass = std::exp(a + c + rng.uniform(-10.0, 10.0));
    const double base = jcl_scalar_form(a, c, mass);
    const double da = base - jcl_scalar_form(a + eps, c, mass);
    const double dc = jcl_scalar_form(a, c + eps, mass) - base;
    const double ds = jcl_scalar_form(a, c, mass * (1.0 + eps)) - base;
    const double worst = std::min({da, dc, ds});
    s.worst_margin = std::min(s.worst_margin, worst);
    record(s, worst > 0.0);
  }
  return s;
}

}  // namespace

VerifyReport run_verify_bound(const VerifyBoundOptions& opts) {
  if (opts.trials == 0) throw std::invalid_argument("verify-bound: trials must be >= 1");
  VerifyReport r;
  // One stream per suite so that suites do not perturb each other.
  Rng jensen(opts.seed);
  Rng tight(opts.seed + 1);
  Rng reduction(opts.seed + 2);
  Rng gradient(opts.seed + 3);
  Rng mono(opts.seed + 4);
  r.suites.push_back(jensen_suite(opts, jensen));
  r.suites.push_back(tightness_suite(opts, tight));
  r.suites.push_back(reduction_suite(opts, reduction));
  r.suites.push_back(gradient_suite(opts, gradient));
  r.suites.push_back(monotonicity_suite(opts, mono));
  return r;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string train_log_csv(const TrainingLog& log) {
  std::ostringstream os;
  os << "epoch,mean_loss,lr,grad_norm,queue_size\n";
  for (const EpochRecord& r : log.epochs) {
    os << r.epoch << ',' << format_double(r.mean_loss) << ',' << format_double(r.lr) << ','
       << format_double(r.grad_norm) << ',' << r.queue_size << '\n';
  }
  return os.str();
}

std::string step_log_csv(const TrainingLog& log) {
  std::ostringstream os;
  os << "step,epoch,loss,grad_norm,lr\n";
  for (const StepRecord& r : log.steps) {
    os << r.step << ',' << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm)
       << ',' << format_double(r.lr) << '\n';
  }
  return os.str();
}

std::string timing_csv(const TrainingLog& log) {
  std::ostringstream os;
  os << "epoch,wall_seconds\n";
  for (const EpochRecord& r : log.epochs) os << r.epoch << ',' << format_double(r.wall_seconds) << '\n';
  return os.str();
}

std::string histogram_csv(const HistogramReport& h) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    os << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
  }
  return os.str();
}

json experiment_spec_json(const std::string& command, const json& args) {
  return json{{"command", command}, {"args", args}};
}

TrainingState run_train(const TrainConfig& config, Method method,
                        const std::optional<std::filesystem::path>& out_dir) {
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    const json spec = experiment_spec_json(
        "train", json{{"method", to_string(method)}, {"seed", config.seed}, {"config", config_to_json(config)}});
    write_text_file(*out_dir / "spec.json", spec.dump(2) + "\n");
  }
  Trainer trainer(config, method, make_training_set(config), Rng(config.seed));
  try {
    trainer.run();
  } catch (const TrainingAborted& e) {
    if (out_dir) {
      const DiagnosticRecord& d = e.record();
      const json diag{{"epoch", d.epoch},
                      {"step", d.step},
                      {"instance_ids", d.instance_ids},
                      {"loss", std::isfinite(d.loss) ? json(d.loss) : json(format_double(d.loss))},
                      {"message", d.message}};
      write_text_file(*out_dir / "diagnostic.json", diag.dump(2) + "\n");
    }
    throw;
  }
  const TrainingState& s = trainer.state();
  if (out_dir) {
    save_checkpoint(s, *out_dir / "checkpoint.json");
    write_text_file(*out_dir / "train_log.csv", train_log_csv(s.log));
    write_text_file(*out_dir / "steps.csv", step_log_csv(s.log));
    write_text_file(*out_dir / "timing.csv", timing_csv(s.log));
  }
  return s;
}

std::string probe_csv(const ProbeResult& r, const std::string& method, FeatureTap tap, std::uint64_t seed) {
  std::ostringstream os;
  os << "method,tap,seed,train_accuracy,test_accuracy,train_count,test_count,classes\n";
  os << method << ',' << to_string(tap) << ',' << seed << ',' << format_double(r.train_accuracy) << ','
     << format_double(r.test_accuracy) << ',' << r.train_count << ',' << r.test_count << ',' << r.classes
     << '\n';
  return os.str();
}

ProbeResult run_probe(const TrainingState& checkpoint, std::uint64_t seed, const ProbeConfig& cfg) {
  Rng rng(seed);
  return probe_encoder(checkpoint.query_encoder, checkpoint.config, cfg, rng);
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::kPositiveKeys:
      return "mprime";
    case SweepParam::kLambda:
      return "lambda";
    case SweepParam::kTau:
      return "tau";
  }
  return "lambda";
}

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "mprime") return SweepParam::kPositiveKeys;
  if (s == "lambda") return SweepParam::kLambda;
  if (s == "tau") return SweepParam::kTau;
  throw std::invalid_argument("unknown sweep parameter: " + s);
}

TrainConfig apply_sweep_value(TrainConfig base, SweepParam param, double value) {
  switch (param) {
    case SweepParam::kPositiveKeys:
      if (!(value >= 1.0) || value != std::floor(value)) {
        throw std::invalid_argument("mprime values must be integers >= 1");
      }
      base.positive_keys = static_cast<std::size_t>(value);
      break;
    case SweepParam::kLambda:
      base.lambda = value;
      break;
    case SweepParam::kTau:
      base.tau = value;
      break;
  }
  base.validate();
  return base;
}

std::vector<SweepRow> run_sweep(SweepParam param, const std::vector<double>& values,
                                const TrainConfig& base, Method method, std::uint64_t probe_seed,
                                const ProbeConfig& probe_cfg,
                                const std::optional<std::filesystem::path>& out_dir) {
  if (values.empty()) throw std::invalid_argument("sweep: no values");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    try {
      const TrainConfig cfg = apply_sweep_value(base, param, values[i]);
      std::optional<std::filesystem::path> run_dir;
      if (out_dir) run_dir = *out_dir / ("run_" + std::to_string(i));
      const TrainingState s = run_train(cfg, method, run_dir);
      row.final_loss = s.log.epochs.back().mean_loss;
      const ProbeResult pr = run_probe(s, probe_seed, probe_cfg);
      row.probe_accuracy = pr.test_accuracy;
      if (run_dir) write_text_file(*run_dir / "probe.csv", probe_csv(pr, to_string(method), probe_cfg.tap, probe_seed));
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  if (out_dir) write_text_file(*out_dir / "sweep.csv", sweep_csv(param, rows));
  return rows;
}

std::string sweep_csv(SweepParam param, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "param,value,probe_accuracy,final_loss,status\n";
  for (const SweepRow& r : rows) {
    os << to_string(param) << ',' << format_double(r.value) << ',';
    if (r.ok) {
      os << format_double(r.probe_accuracy) << ',' << format_double(r.final_loss) << ",ok\n";
    } else {
      os << ",,failed\n";
    }
  }
  return os.str();
}

FeatureAnalysis run_analyze_features(const TrainingState& checkpoint, std::size_t instances,
                                     std::size_t augmentations, std::uint64_t seed, FeatureTap tap,
                                     std::size_t bins) {
  const SyntheticGenerator gen(checkpoint.config.synthetic_spec());
  Rng rng(seed);
  return analyze_features(checkpoint.query_encoder, gen, instances, augmentations, tap, bins, rng);
}

std::string feature_summary_csv(const FeatureAnalysis& a) {
  std::ostringstream os;
  os << "metric,mean,std,count\n";
  os << "similarity," << format_double(a.similarity.mean) << ',' << format_double(a.similarity.std) << ','
     << a.similarity.count << '\n';
  os << "variance," << format_double(a.variance.mean) << ',' << format_double(a.variance.std) << ','
     << a.variance.count << '\n';
  return os.str();
}

}  // namespace jcl
