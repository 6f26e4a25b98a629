#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jcl/checkpoint.hpp"
#include "jcl/experiment.hpp"
#include "jcl/key_statistics.hpp"
#include "jcl/losses.hpp"
#include "jcl/trainer.hpp"

namespace py = pybind11;
using namespace jcl;

namespace {

using Rows = std::vector<Vector>;

Rows to_rows(const Matrix& m) {
  Rows out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

ContrastiveInstance make_instance(const Vector& q, const Vector& mu, const Rows& sigma, const Rows& negatives) {
  ContrastiveInstance in;
  in.query = q;
  in.pos_stats.mu = mu;
  in.pos_stats.sigma = Matrix::from_rows(sigma);
  in.pos_stats.count = 1;
  in.negatives = make_negatives(negatives, q.size());
  return in;
}

py::dict log_to_dict(const TrainingLog& log) {
  std::vector<double> epoch_loss, step_loss, grad_norm;
  for (const EpochRecord& r : log.epochs) epoch_loss.push_back(r.mean_loss);
  for (const StepRecord& r : log.steps) {
    step_loss.push_back(r.loss);
    grad_norm.push_back(r.grad_norm);
  }
  py::dict d;
  d["epoch_loss"] = epoch_loss;
  d["step_loss"] = step_loss;
  d["step_grad_norm"] = grad_norm;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Contrastive losses with Gaussian positive-key statistics";

  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("dot", [](const Vector& a, const Vector& b) { return dot(a, b); }, py::arg("a"), py::arg("b"));
  m.def("l2_normalize", [](const Vector& v) { return l2_normalize(v); }, py::arg("v"));
  m.def("log_sum_exp", [](const Vector& v) { return log_sum_exp(v); }, py::arg("values"));
  m.def("quadratic_form", [](const Vector& q, const Rows& s) { return quadratic_form(q, Matrix::from_rows(s)); },
        py::arg("q"), py::arg("sigma"));

  m.def(
      "compute_covariance",
      [](const Rows& keys) {
        const PositiveKeyStats s = compute_covariance(keys);
        return py::make_tuple(s.mu, to_rows(s.sigma));
      },
      py::arg("keys"), "Mean and 1/M covariance of a set of keys.");

  m.def(
      "pair_loss",
      [](const Vector& q, const Vector& k_pos, const Rows& negatives, double tau) {
        return pair_loss(q, k_pos, *make_negatives(negatives, q.size()), tau);
      },
      py::arg("q"), py::arg("k_pos"), py::arg("negatives"), py::arg("tau"));

  m.def(
      "jcl_loss",
      [](const Vector& q, const Vector& mu, const Rows& sigma, const Rows& negatives, double tau, double lam) {
        const LossResult r = jcl_loss(make_instance(q, mu, sigma, negatives), LossParams{tau, lam});
        return py::make_tuple(r.value, r.grad_query);
      },
      py::arg("q"), py::arg("mu"), py::arg("sigma"), py::arg("negatives"), py::arg("tau"), py::arg("lam"),
      "Closed-form loss and its gradient with respect to q.");

  m.def(
      "monte_carlo_inf_loss",
      [](const Vector& q, const Vector& mu, const Rows& sigma, const Rows& negatives, double tau, double lam,
         std::size_t samples, std::uint64_t seed) {
        Rng rng(seed);
        const McEstimate e =
            monte_carlo_inf_loss(make_instance(q, mu, sigma, negatives), LossParams{tau, lam}, samples, rng);
        return py::make_tuple(e.mean, e.std_err);
      },
      py::arg("q"), py::arg("mu"), py::arg("sigma"), py::arg("negatives"), py::arg("tau"), py::arg("lam"),
      py::arg("samples"), py::arg("seed") = 0, "Sampled expected pair loss: (mean, standard error).");

  m.def(
      "gaussian_mgf_expectation",
      [](const Vector& a, const Vector& mu, const Rows& s) { return gaussian_mgf_expectation(a, mu, Matrix::from_rows(s)); },
      py::arg("a"), py::arg("mu"), py::arg("sigma"));
  m.def("jcl_scalar_form", &jcl_scalar_form, py::arg("a"), py::arg("c"), py::arg("neg_mass"));

  m.def(
      "verify_bound",
      [](std::size_t trials, std::uint64_t seed, std::size_t samples) {
        return run_verify_bound({trials, seed, samples}).to_csv();
      },
      py::arg("trials") = 100, py::arg("seed") = 0, py::arg("samples") = 100000,
      "Runs the property suites and returns the CSV report.");

  m.def(
      "train",
      [](const std::string& config_json, const std::string& method) {
        const TrainConfig cfg = config_from_json(nlohmann::json::parse(config_json));
        TrainingState s;
        {
          py::gil_scoped_release release;
          s = run_train(cfg, method_from_string(method), std::nullopt);
        }
        return log_to_dict(s.log);
      },
      py::arg("config_json"), py::arg("method") = "jcl",
      "Trains on the synthetic task; config is a JSON object of TrainConfig fields.");
}
