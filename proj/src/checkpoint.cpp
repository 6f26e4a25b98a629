#include "jcl/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jcl {

using nlohmann::json;

namespace {

json array_to_json(const std::vector<double>& values, std::vector<std::size_t> shape) {
  return json{{"shape", std::move(shape)}, {"values", values}};
}

std::vector<double> array_from_json(const json& j, const std::vector<std::size_t>& expected_shape) {
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape != expected_shape) throw std::invalid_argument("checkpoint: array shape mismatch");
  auto values = j.at("values").get<std::vector<double>>();
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  if (values.size() != n) throw std::invalid_argument("checkpoint: array size does not match shape");
  return values;
}

Matrix matrix_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2) throw std::invalid_argument("checkpoint: expected a 2-d array");
  Matrix m(shape[0], shape[1]);
  m.data() = array_from_json(j, shape);
  return m;
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

json config_to_json(const TrainConfig& c) {
  return json{{"batch_size", c.batch_size},
              {"positive_keys", c.positive_keys},
              {"lambda", c.lambda},
              {"tau", c.tau},
              {"momentum", c.momentum},
              {"queue_capacity", c.queue_capacity},
              {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"lr", c.lr},
              {"sgd_momentum", c.sgd_momentum},
              {"weight_decay", c.weight_decay},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"instances", c.instances},
              {"ambient_dim", c.ambient_dim},
              {"clusters", c.clusters},
              {"cluster_spread", c.cluster_spread},
              {"aug_noise", c.aug_noise},
              {"aug_gain", c.aug_gain},
              {"style_dims", c.style_dims},
              {"style_noise", c.style_noise},
              {"data_seed", c.data_seed}};
}

TrainConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const json known = config_to_json(TrainConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key: '" + key + "'");
  }
  TrainConfig c;
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "positive_keys", c.positive_keys);
  read_field(j, "lambda", c.lambda);
  read_field(j, "tau", c.tau);
  read_field(j, "momentum", c.momentum);
  read_field(j, "queue_capacity", c.queue_capacity);
  read_field(j, "embed_dim", c.embed_dim);
  read_field(j, "hidden_dim", c.hidden_dim);
  read_field(j, "lr", c.lr);
  read_field(j, "sgd_momentum", c.sgd_momentum);
  read_field(j, "weight_decay", c.weight_decay);
  read_field(j, "epochs", c.epochs);
  read_field(j, "seed", c.seed);
  read_field(j, "instances", c.instances);
  read_field(j, "ambient_dim", c.ambient_dim);
  read_field(j, "clusters", c.clusters);
  read_field(j, "cluster_spread", c.cluster_spread);
  read_field(j, "aug_noise", c.aug_noise);
  read_field(j, "aug_gain", c.aug_gain);
  read_field(j, "style_dims", c.style_dims);
  read_field(j, "style_noise", c.style_noise);
  read_field(j, "data_seed", c.data_seed);
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

json encoder_to_json(const EncoderParams& p) {
  json layers = json::array();
  for (const DenseLayer& l : p.layers) {
    layers.push_back({{"weight", array_to_json(l.weight.data(), {l.weight.rows(), l.weight.cols()})},
                      {"bias", array_to_json(l.bias, {l.bias.size()})}});
  }
  return json{{"activation", to_string(p.activation)},
              {"normalize_output", p.normalize_output},
              {"backbone_layers", p.backbone_layers},
              {"layers", std::move(layers)}};
}

EncoderParams encoder_from_json(const json& j) {
  EncoderParams p;
  p.activation = activation_from_string(j.at("activation").get<std::string>());
  p.normalize_output = j.at("normalize_output").get<bool>();
  p.backbone_layers = j.at("backbone_layers").get<std::size_t>();
  for (const json& lj : j.at("layers")) {
    DenseLayer l;
    l.weight = matrix_from_json(lj.at("weight"));
    l.bias = array_from_json(lj.at("bias"), {l.weight.rows()});
    if (!p.layers.empty() && p.layers.back().weight.rows() != l.weight.cols()) {
      throw std::invalid_argument("checkpoint: incompatible consecutive layer sizes");
    }
    p.layers.push_back(std::move(l));
  }
  if (p.layers.empty() || p.backbone_layers > p.layers.size()) {
    throw std::invalid_argument("checkpoint: malformed encoder");
  }
  return p;
}

// Wall-clock times are kept out of checkpoints so reruns produce identical files.
json checkpoint_to_json(const TrainingState& s) {
  json steps = json::array();
  for (const StepRecord& r : s.log.steps) {
    steps.push_back({{"epoch", r.epoch}, {"step", r.step}, {"loss", r.loss}, {"grad_norm", r.grad_norm}, {"lr", r.lr}});
  }
  json epochs = json::array();
  for (const EpochRecord& r : s.log.epochs) {
    epochs.push_back({{"epoch", r.epoch},
                      {"mean_loss", r.mean_loss},
                      {"lr", r.lr},
                      {"grad_norm", r.grad_norm},
                      {"queue_size", r.queue_size}});
  }
  const Matrix queue = s.queue.snapshot();
  json velocity = s.optimizer.velocity().layers.empty() ? json(nullptr) : encoder_to_json(s.optimizer.velocity());
  return json{{"format_version", kCheckpointFormatVersion},
              {"method", to_string(s.method)},
              {"config", config_to_json(s.config)},
              {"seed", s.config.seed},
              {"epoch", s.epoch},
              {"step", s.step},
              {"rng_state", s.rng.state()},
              {"query_encoder", encoder_to_json(s.query_encoder)},
              {"key_encoder", encoder_to_json(s.key_encoder)},
              {"optimizer",
               {{"momentum", s.optimizer.momentum()},
                {"weight_decay", s.optimizer.weight_decay()},
                {"velocity", std::move(velocity)}}},
              {"queue",
               {{"capacity", s.queue.capacity()},
                {"entries", array_to_json(queue.data(), {queue.rows(), queue.cols()})}}},
              {"log", {{"steps", std::move(steps)}, {"epochs", std::move(epochs)}}}};
}

TrainingState checkpoint_from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw std::invalid_argument("checkpoint: unsupported format_version " + std::to_string(version));
    }
    TrainingState s;
    s.config = config_from_json(j.at("config"));
    s.method = method_from_string(j.at("method").get<std::string>());
    s.rng = Rng(j.at("seed").get<std::uint64_t>());
    s.rng.restore(j.at("rng_state").get<std::string>());
    s.epoch = j.at("epoch").get<std::size_t>();
    s.step = j.at("step").get<std::size_t>();
    s.query_encoder = encoder_from_json(j.at("query_encoder"));
    s.key_encoder = encoder_from_json(j.at("key_encoder"));
    if (!s.key_encoder.same_shape(s.query_encoder)) {
      throw std::invalid_argument("checkpoint: query/key encoder architecture mismatch");
    }
    if (s.query_encoder.input_dim() != s.config.ambient_dim || s.query_encoder.output_dim() != s.config.embed_dim) {
      throw std::invalid_argument("checkpoint: encoder does not match config dimensions");
    }
    const json& opt = j.at("optimizer");
    s.optimizer = SgdOptimizer(opt.at("momentum").get<double>(), opt.at("weight_decay").get<double>());
    if (!opt.at("velocity").is_null()) {
      EncoderParams v = encoder_from_json(opt.at("velocity"));
      if (!v.same_shape(s.query_encoder)) throw std::invalid_argument("checkpoint: velocity shape mismatch");
      s.optimizer.set_velocity(std::move(v));
    }
    const json& q = j.at("queue");
    s.queue = NegativeQueue(q.at("capacity").get<std::size_t>(), s.config.embed_dim);
    const Matrix entries = matrix_from_json(q.at("entries"));
    if (entries.cols() != s.config.embed_dim || entries.rows() > s.queue.capacity()) {
      throw std::invalid_argument("checkpoint: queue entries do not match config");
    }
    std::vector<Vector> rows;
    for (std::size_t r = 0; r < entries.rows(); ++r) rows.emplace_back(entries.row(r).begin(), entries.row(r).end());
    s.queue.push(rows);
    for (const json& r : j.at("log").at("steps")) {
      s.log.steps.push_back({r.at("epoch").get<std::size_t>(), r.at("step").get<std::size_t>(),
                             r.at("loss").get<double>(), r.at("grad_norm").get<double>(),
                             r.at("lr").get<double>()});
    }
    for (const json& r : j.at("log").at("epochs")) {
      s.log.epochs.push_back({r.at("epoch").get<std::size_t>(), r.at("mean_loss").get<double>(),
                              r.at("lr").get<double>(), r.at("grad_norm").get<double>(),
                              r.at("queue_size").get<std::size_t>(), r.value("wall_seconds", 0.0)});
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(state).dump(1) + "\n");
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace jcl
