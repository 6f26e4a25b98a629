// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "jcl/analysis.hpp"
#include "jcl/experiment.hpp"
#include "jcl/key_statistics.hpp"
#include "jcl/losses.hpp"
#include "jcl/probe.hpp"
#include "jcl/queue.hpp"
#include "jcl/trainer.hpp"
#include "unit/oracles.hpp"

using namespace jcl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Vector> rows_of(const Matrix& m) {
  std::vector<Vector> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

double oracle_jcl(const ContrastiveInstance& in, const LossParams& p, const Vector& q) {
  return oracle::jcl_loss(q, in.pos_stats.mu, in.pos_stats.sigma, rows_of(*in.negatives), p.tau, p.lambda);
}

// --------------------------------------------------------------------------

Outcome jensen_bound() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  int passed = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const RandomInstance ri = random_instance(rng);
    const McEstimate mc = monte_carlo_inf_loss(ri.instance, ri.params, 100000, rng);
    const double bound = oracle_jcl(ri.instance, ri.params, ri.instance.query);
    const double margin = bound + 3 * mc.std_err - mc.mean;
    worst = std::min(worst, margin);
    passed += margin >= 0;
  }
  const double secs = seconds_since(t0);
  return {passed == 100 && secs < 60, fmt("%d/100 within bound + 3 se, worst margin %.3g, %.1f s", passed, worst, secs)};
}

Outcome tightness() {
  Rng rng(102);
  RandomInstanceOptions opts;
  opts.zero_sigma = true;
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const RandomInstance ri = random_instance(rng, opts);
    const McEstimate mc = monte_carlo_inf_loss(ri.instance, ri.params, 1000, rng);
    worst = std::max(worst, std::abs(mc.mean - jcl_loss(ri.instance, ri.params).value));
  }
  return {worst <= 1e-12, fmt("max |mc - closed| = %.3g over 100 instances", worst)};
}

Outcome reduction() {
  Rng rng(103);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    RandomInstance ri = random_instance(rng);
    ri.params.lambda = 0;
    const double closed = jcl_loss(ri.instance, ri.params).value;
    const double pair = oracle::pair_loss(ri.instance.query, ri.instance.pos_stats.mu, rows_of(*ri.instance.negatives),
                                          ri.params.tau);
    worst = std::max(worst, std::abs(closed - pair) / std::abs(pair));
  }

  TrainConfig c;
  c.instances = 64;
  c.ambient_dim = 16;
  c.style_dims = 0;
  c.embed_dim = 8;
  c.hidden_dim = 32;
  c.batch_size = 16;
  c.queue_capacity = 128;
  c.epochs = 5;
  c.lambda = 0;
  c.positive_keys = 1;
  const TrainingState j = run_train(c, Method::kJcl, std::nullopt);
  const TrainingState n = run_train(c, Method::kInfoNce, std::nullopt);
  bool same = j.log.steps.size() == n.log.steps.size();
  for (std::size_t i = 0; same && i < j.log.steps.size(); ++i) same = j.log.steps[i].loss == n.log.steps[i].loss;
  return {worst <= 1e-12 && same,
          fmt("max relative error %.3g; per-step losses %s over %zu steps", worst, same ? "identical" : "DIFFER",
              j.log.steps.size())};
}

Outcome gradient() {
  Rng rng(104);
  double worst = 0;
  const double h = 1e-6;
  RandomInstanceOptions opts;
  opts.min_dim = 2;
  for (int t = 0; t < 100; ++t) {
    const RandomInstance ri = t == 0 ? worked_example() : random_instance(rng, opts);
    const Vector g = jcl_loss(ri.instance, ri.params).grad_query;
    double diff2 = 0, g2 = 0, fd2 = 0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      Vector up = ri.instance.query, down = ri.instance.query;
      up[a] += h;
      down[a] -= h;
      const double fd = (oracle_jcl(ri.instance, ri.params, up) - oracle_jcl(ri.instance, ri.params, down)) / (2 * h);
      diff2 += (g[a] - fd) * (g[a] - fd);
      g2 += g[a] * g[a];
      fd2 += fd * fd;
    }
    const double denom = std::sqrt(std::max(g2, fd2));
    worst = std::max(worst, denom == 0 ? 0.0 : std::sqrt(diff2) / denom);
  }
  return {worst < 1e-5, fmt("max relative error %.3g over 100 instances incl. worked example", worst)};
}

Outcome worked_value() {
  const RandomInstance w = worked_example();
  const double v = jcl_loss(w.instance, w.params).value;
  const double expected = 50.0 + std::log1p(std::exp(-55.0));
  return {std::abs(v - expected) <= 1e-9, fmt("value %.17g, expected %.17g", v, expected)};
}

Outcome mgf_identity() {
  Rng rng(106);
  int passed = 0;
  double worst_z = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + rng.index(8);
    const Vector mu = oracle::random_vector(rng, d, 1.0);
    const std::size_t r = 1 + rng.index(d);
    Matrix b(d, r);
    for (double& x : b.data()) x = rng.normal() / std::sqrt(static_cast<double>(r));
    Matrix s(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < r; ++k) s(i, j) += b(i, k) * b(j, k);
    const Vector a = oracle::random_vector(rng, d, 0.5);
    const GaussianSampler sampler(mu, s);
    const std::size_t n = 1000000;
    long double sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double e = std::exp(oracle::dot(a, sampler.sample(rng)));
      sum += e;
      sum2 += e * e;
    }
    const long double m = sum / n;
    const double se = static_cast<double>(std::sqrt((sum2 / n - m * m) / (n - 1)) / m);
    const double z = std::abs(static_cast<double>(std::log(m)) - gaussian_mgf_expectation(a, mu, s)) / se;
    worst_z = std::max(worst_z, z);
    passed += z <= 3;
  }
  return {passed == 20, fmt("%d/20 within 3 se, worst |z| = %.2f", passed, worst_z)};
}

Outcome covariance_oracle() {
  Rng rng(107);
  double worst = 0;
  bool sym = true, psd = true;
  double worst_shift = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.index(16);
    const std::size_t m = 1 + rng.index(16);
    std::vector<Vector> keys;
    for (std::size_t i = 0; i < m; ++i) keys.push_back(oracle::random_unit(rng, d));
    const PositiveKeyStats st = compute_covariance(keys);
    const oracle::Stats ref = oracle::covariance(keys);
    worst = std::max(worst, oracle::max_abs_diff(st.sigma, ref.sigma));
    for (std::size_t a = 0; a < d; ++a) {
      worst = std::max(worst, std::abs(st.mu[a] - ref.mu[a]));
      for (std::size_t b = 0; b < d; ++b) sym &= st.sigma(a, b) == st.sigma(b, a);
    }
    psd &= stats_psd_check(st);
    const Vector shift = oracle::random_vector(rng, d, 3.0);
    for (Vector& k : keys)
      for (std::size_t a = 0; a < d; ++a) k[a] += shift[a];
    worst_shift = std::max(worst_shift, oracle::max_abs_diff(compute_covariance(keys).sigma, st.sigma));
  }
  return {worst <= 1e-12 && sym && psd && worst_shift <= 1e-12,
          fmt("max error %.3g, symmetric %s, psd %s, translation drift %.3g", worst, sym ? "yes" : "no",
              psd ? "yes" : "no", worst_shift)};
}

Outcome monotonicity() {
  Rng rng(108);
  int passed = 0;
  const double eps = 1e-3;
  auto direct = [](double a, double c, double s) {
    return static_cast<double>(std::log(std::exp(static_cast<long double>(a + c)) + s) - a);
  };
  for (int t = 0; t < 100; ++t) {
    const double a = rng.uniform(-10.0, 10.0);
    const double c = rng.uniform(0.0, 10.0);
    const double s = std::exp(a + c + rng.uniform(-8.0, 8.0));
    const double base = jcl_scalar_form(a, c, s);
    const double da = (jcl_scalar_form(a + eps, c, s) - base) / eps;
    const double dc = (jcl_scalar_form(a, c + eps, s) - base) / eps;
    const double ds = (jcl_scalar_form(a, c, s * (1 + eps)) - base) / (s * eps);
    const bool agrees = std::abs(base - direct(a, c, s)) <= 1e-10 * (1 + std::abs(base));
    passed += da < 0 && dc > 0 && ds > 0 && agrees;
  }
  return {passed == 100, fmt("%d/100 points with dL/da < 0, dL/dc > 0, dL/dS > 0", passed)};
}

Outcome queue_semantics() {
  Rng rng(109);
  const std::size_t sequences = 10000;
  std::size_t failures = 0;
  for (std::size_t s = 0; s < sequences; ++s) {
    const std::size_t cap = 1 + rng.index(16);
    const std::size_t dim = 1 + rng.index(3);
    NegativeQueue q(cap, dim);
    oracle::Fifo ref(cap);
    std::size_t pushed = 0;
    bool ok = true;
    const std::size_t pushes = 1 + rng.index(12);
    for (std::size_t p = 0; p < pushes && ok; ++p) {
      std::vector<Vector> batch(rng.index(8));
      for (Vector& k : batch) k = oracle::random_vector(rng, dim);
      ok &= q.push(batch) == ref.push(batch);
      pushed += batch.size();
      ok &= q.size() == std::min(pushed, cap) && q.size() == ref.size();
      ok &= q.entries() == ref.entries();
      if (pushed >= cap) ok &= q.full() && q.size() == cap;
    }
    failures += !ok;
  }
  return {failures == 0, fmt("%zu/%zu sequences match the reference FIFO", sequences - failures, sequences)};
}

TrainConfig toy_config() {
  TrainConfig c;
  c.instances = 64;
  c.embed_dim = 8;
  c.ambient_dim = 16;
  c.style_dims = 0;
  c.epochs = 50;
  c.batch_size = 16;
  c.queue_capacity = 128;
  c.hidden_dim = 32;
  c.lr = 0.03;
  c.momentum = 0.99;
  return c;
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig c = toy_config();
  bool ok = true;
  std::string detail;
  for (Method m : {Method::kJcl, Method::kInfoNce, Method::kVanilla}) {
    const TrainingState a = run_train(c, m, std::nullopt);
    const TrainingState b = run_train(c, m, std::nullopt);
    bool finite = true;
    for (const StepRecord& r : a.log.steps) finite &= std::isfinite(r.loss) && std::isfinite(r.grad_norm);
    bool identical = a.query_encoder == b.query_encoder && a.key_encoder == b.key_encoder &&
                     a.log.steps.size() == b.log.steps.size();
    for (std::size_t i = 0; identical && i < a.log.steps.size(); ++i)
      identical = a.log.steps[i].loss == b.log.steps[i].loss && a.log.steps[i].grad_norm == b.log.steps[i].grad_norm;
    const double first = a.log.epochs.front().mean_loss, last = a.log.epochs.back().mean_loss;
    ok &= last < first && finite && identical;
    detail += fmt("%s %.3f->%.3f%s%s; ", to_string(m).c_str(), first, last, finite ? "" : " NONFINITE",
                  identical ? "" : " NOT-REPRODUCIBLE");
  }
  const double secs = seconds_since(t0);
  ok &= secs < 30;
  return {ok, detail + fmt("%.1f s for six runs", secs)};
}

// One training protocol per seed feeds both qualitative criteria.
struct SeedRun {
  double jcl_sim = 0, jcl_var = 0, nce_sim = 0, nce_var = 0;
  double probe[4] = {0, 0, 0, 0};
};

constexpr double kLambdas[4] = {0.0, 0.2, 4.0, 100.0};

std::vector<SeedRun> qualitative_runs(double& seconds_ac11) {
  std::vector<SeedRun> runs;
  seconds_ac11 = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig c;
    c.seed = seed;
    SeedRun r;
    const SyntheticGenerator gen(c.synthetic_spec());
    for (int i = 0; i < 4; ++i) {
      TrainConfig ci = c;
      ci.lambda = kLambdas[i];
      const auto t0 = std::chrono::steady_clock::now();
      const TrainingState s = run_train(ci, Method::kJcl, std::nullopt);
      if (ci.lambda == 4.0) {
        Rng rng(seed);
        const FeatureAnalysis f = analyze_features(s.query_encoder, gen, 1024, 32, FeatureTap::kBackbone, 20, rng);
        r.jcl_sim = f.similarity.mean;
        r.jcl_var = f.variance.mean;
        seconds_ac11 += seconds_since(t0);
      }
      Rng probe_rng(seed);
      r.probe[i] = probe_encoder(s.query_encoder, ci, ProbeConfig{}, probe_rng).test_accuracy;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const TrainingState nce = run_train(c, Method::kInfoNce, std::nullopt);
    Rng rng(seed);
    const FeatureAnalysis f = analyze_features(nce.query_encoder, gen, 1024, 32, FeatureTap::kBackbone, 20, rng);
    r.nce_sim = f.similarity.mean;
    r.nce_var = f.variance.mean;
    seconds_ac11 += seconds_since(t0);
    std::printf("  seed %llu: sim jcl %.4f infonce %.4f | var jcl %.3e infonce %.3e | probe lambda 0 %.3f, 0.2 %.3f, 4 %.3f, 100 %.3f\n",
                static_cast<unsigned long long>(seed), r.jcl_sim, r.nce_sim, r.jcl_var, r.nce_var, r.probe[0],
                r.probe[1], r.probe[2], r.probe[3]);
    std::fflush(stdout);
    runs.push_back(r);
  }
  return runs;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("AC1 jensen bound", jensen_bound);
  report("AC2 tightness", tightness);
  report("AC3 reduction", reduction);
  report("AC4 gradient", gradient);
  report("AC5 worked value", worked_value);
  report("AC6 mgf identity", mgf_identity);
  report("AC7 covariance oracle", covariance_oracle);
  report("AC8 monotonicity", monotonicity);
  report("AC9 queue semantics", queue_semantics);
  report("AC10 end-to-end smoke", end_to_end);

  std::vector<SeedRun> runs;
  double ac11_seconds = 0;
  std::string run_error;
  try {
    runs = qualitative_runs(ac11_seconds);
  } catch (const std::exception& e) {
    run_error = std::string("exception: ") + e.what();
  }
  report("AC11 view similarity and variance", [&]() -> Outcome {
    if (runs.empty()) return {false, run_error};
    int sim = 0, var = 0;
    for (const SeedRun& r : runs) {
      sim += r.jcl_sim >= r.nce_sim;
      var += r.jcl_var <= r.nce_var;
    }
    return {sim >= 4 && var >= 4 && ac11_seconds < 600,
            fmt("similarity >= baseline in %d/5 seeds, variance <= baseline in %d/5 seeds, %.0f s", sim, var,
                ac11_seconds)};
  });
  report("AC12 lambda sweep", [&]() -> Outcome {
    if (runs.empty()) return {false, run_error};
    int wins = 0;
    for (const SeedRun& r : runs) wins += r.probe[3] <= r.probe[2];
    return {wins >= 4, fmt("probe(lambda=100) <= probe(lambda=4) in %d/5 seeds", wins)};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
