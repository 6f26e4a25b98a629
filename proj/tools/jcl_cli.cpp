// Command-line front end: bound verification, training, probing, sweeps
// and feature-distribution analysis. Reports are CSV; every output
// directory also receives the resolved spec.json.
//
// Verbosity is read from JCL_LOG_LEVEL (trace|debug|info|warn|error|off).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "jcl/checkpoint.hpp"
#include "jcl/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("jcl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("JCL_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad value in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

void emit(const std::optional<fs::path>& out, const std::string& name, const std::string& text) {
  if (out) jcl::write_text_file(*out / name, text);
  std::cout << text;
}

void write_spec(const std::optional<fs::path>& out, const std::string& command, const json& args) {
  if (!out) return;
  fs::create_directories(*out);
  jcl::write_text_file(*out / "spec.json", jcl::experiment_spec_json(command, args).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Joint contrastive learning: loss verification and desk-scale experiments"};
  app.require_subcommand(1);

  // verify-bound
  auto* verify = app.add_subcommand("verify-bound", "Run the loss property suites on random instances");
  jcl::VerifyBoundOptions vopts;
  std::optional<std::string> verify_out;
  verify->add_option("--trials", vopts.trials, "Random instances per suite")->check(CLI::PositiveNumber);
  verify->add_option("--seed", vopts.seed, "Base seed");
  verify->add_option("--samples", vopts.mc_samples, "Monte-Carlo samples per Jensen trial")->check(CLI::PositiveNumber);
  verify->add_option("--out", verify_out, "Directory for verify_bound.csv and spec.json");

  // train
  auto* train = app.add_subcommand("train", "Train an encoder on the synthetic task");
  std::string train_spec;
  std::string method = "jcl";
  std::string train_out;
  train->add_option("--spec", train_spec, "Config file (JSON object of TrainConfig fields)")->required()->check(CLI::ExistingFile);
  train->add_option("--method", method, "Objective")->check(CLI::IsMember({"jcl", "infonce", "vanilla"}));
  train->add_option("--out", train_out, "Output directory")->required();

  // probe
  auto* probe = app.add_subcommand("probe", "Linear probe on a frozen checkpoint");
  std::string probe_ckpt;
  std::uint64_t probe_seed = 0;
  std::string tap = "backbone";
  std::optional<std::string> probe_out;
  jcl::ProbeConfig pcfg;
  probe->add_option("--checkpoint", probe_ckpt, "checkpoint.json")->required()->check(CLI::ExistingFile);
  probe->add_option("--seed", probe_seed, "Probe seed");
  probe->add_option("--features", tap, "Feature tap")->check(CLI::IsMember({"backbone", "projection"}));
  probe->add_option("--epochs", pcfg.epochs, "Probe training epochs")->check(CLI::PositiveNumber);
  probe->add_option("--out", probe_out, "Directory for probe.csv and spec.json");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Vary one hyperparameter: train + probe per value");
  std::string sweep_param;
  std::string sweep_values;
  std::string sweep_spec;
  std::string sweep_method = "jcl";
  std::uint64_t sweep_probe_seed = 0;
  std::optional<std::string> sweep_out;
  sweep->add_option("--param", sweep_param, "Parameter")->required()->check(CLI::IsMember({"mprime", "lambda", "tau"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--spec", sweep_spec, "Base config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--method", sweep_method, "Objective")->check(CLI::IsMember({"jcl", "infonce", "vanilla"}));
  sweep->add_option("--probe-seed", sweep_probe_seed, "Probe seed");
  sweep->add_option("--features", tap, "Feature tap")->check(CLI::IsMember({"backbone", "projection"}));
  sweep->add_option("--out", sweep_out, "Output directory (one run_<i> per value)");

  // analyze-features
  auto* analyze = app.add_subcommand("analyze-features", "Similarity and variance distributions of views");
  std::string an_ckpt;
  std::size_t an_instances = 4096;
  std::size_t an_augs = 32;
  std::uint64_t an_seed = 0;
  std::size_t an_bins = 50;
  std::optional<std::string> an_out;
  analyze->add_option("--checkpoint", an_ckpt, "checkpoint.json")->required()->check(CLI::ExistingFile);
  analyze->add_option("--instances", an_instances, "Sampled instances")->check(CLI::PositiveNumber);
  analyze->add_option("--augmentations", an_augs, "Views per instance")->check(CLI::PositiveNumber);
  analyze->add_option("--seed", an_seed, "Sampling seed");
  analyze->add_option("--bins", an_bins, "Histogram bins")->check(CLI::PositiveNumber);
  analyze->add_option("--features", tap, "Feature tap")->check(CLI::IsMember({"backbone", "projection"}));
  analyze->add_option("--out", an_out, "Directory for histograms and spec.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      std::optional<fs::path> out;
      if (verify_out) out = *verify_out;
      write_spec(out, "verify-bound", json{{"trials", vopts.trials}, {"seed", vopts.seed}, {"samples", vopts.mc_samples}});
      spdlog::info("verify-bound: {} trials per suite, seed {}", vopts.trials, vopts.seed);
      const jcl::VerifyReport report = jcl::run_verify_bound(vopts);
      emit(out, "verify_bound.csv", report.to_csv());
      if (!report.all_passed()) {
        spdlog::error("verify-bound: at least one suite failed");
        return 1;
      }
      return 0;
    }

    if (train->parsed()) {
      const jcl::TrainConfig cfg = jcl::load_config(train_spec);
      spdlog::info("train: method={} epochs={} seed={}", method, cfg.epochs, cfg.seed);
      const jcl::TrainingState s = jcl::run_train(cfg, jcl::method_from_string(method), fs::path(train_out));
      const auto& first = s.log.epochs.front();
      const auto& last = s.log.epochs.back();
      spdlog::info("train: epoch {} loss {:.6f} -> epoch {} loss {:.6f}", first.epoch, first.mean_loss,
                   last.epoch, last.mean_loss);
      return 0;
    }

    if (probe->parsed()) {
      std::optional<fs::path> out;
      if (probe_out) out = *probe_out;
      pcfg.tap = jcl::feature_tap_from_string(tap);
      write_spec(out, "probe", json{{"checkpoint", probe_ckpt}, {"seed", probe_seed}, {"features", tap}, {"epochs", pcfg.epochs}});
      const jcl::TrainingState s = jcl::load_checkpoint(probe_ckpt);
      const jcl::ProbeResult r = jcl::run_probe(s, probe_seed, pcfg);
      emit(out, "probe.csv", jcl::probe_csv(r, jcl::to_string(s.method), pcfg.tap, probe_seed));
      return 0;
    }

    if (sweep->parsed()) {
      std::optional<fs::path> out;
      if (sweep_out) out = *sweep_out;
      const jcl::TrainConfig base = jcl::load_config(sweep_spec);
      const std::vector<double> values = parse_values(sweep_values);
      pcfg.tap = jcl::feature_tap_from_string(tap);
      write_spec(out, "sweep",
                 json{{"param", sweep_param}, {"values", values}, {"method", sweep_method},
                      {"probe_seed", sweep_probe_seed}, {"features", tap}, {"config", jcl::config_to_json(base)}});
      const auto rows = jcl::run_sweep(jcl::sweep_param_from_string(sweep_param), values, base,
                                       jcl::method_from_string(sweep_method), sweep_probe_seed, pcfg, out);
      for (const auto& r : rows) {
        if (!r.ok) spdlog::warn("sweep: {}={} failed: {}", sweep_param, r.value, r.error);
      }
      std::cout << jcl::sweep_csv(jcl::sweep_param_from_string(sweep_param), rows);
      return 0;
    }

    if (analyze->parsed()) {
      std::optional<fs::path> out;
      if (an_out) out = *an_out;
      write_spec(out, "analyze-features",
                 json{{"checkpoint", an_ckpt}, {"instances", an_instances}, {"augmentations", an_augs},
                      {"seed", an_seed}, {"bins", an_bins}, {"features", tap}});
      const jcl::TrainingState s = jcl::load_checkpoint(an_ckpt);
      const jcl::FeatureAnalysis a = jcl::run_analyze_features(s, an_instances, an_augs, an_seed,
                                                               jcl::feature_tap_from_string(tap), an_bins);
      if (out) {
        jcl::write_text_file(*out / "similarity_hist.csv", jcl::histogram_csv(a.similarity));
        jcl::write_text_file(*out / "variance_hist.csv", jcl::histogram_csv(a.variance));
      }
      emit(out, "feature_summary.csv", jcl::feature_summary_csv(a));
      return 0;
    }
  } catch (const jcl::TrainingAborted& e) {
    spdlog::error("{} (epoch {}, step {})", e.what(), e.record().epoch, e.record().step);
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
