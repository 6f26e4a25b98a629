#include <gtest/gtest.h>

#include "jcl/probe.hpp"

using namespace jcl;

namespace {

Vector one_hot(std::size_t label, std::size_t classes) {
  Vector v(classes, 0.0);
  v[label] = 1.0;
  return v;
}

}  // namespace

TEST(LinearProbe, OneHotFeaturesAreSeparable) {
  const std::size_t classes = 10;
  std::vector<Vector> train_x, test_x;
  std::vector<std::size_t> train_y, test_y;
  for (std::size_t i = 0; i < 500; ++i) {
    train_x.push_back(one_hot(i % classes, classes));
    train_y.push_back(i % classes);
    test_x.push_back(one_hot((i * 7) % classes, classes));
    test_y.push_back((i * 7) % classes);
  }
  Rng rng(1);
  const ProbeResult r = linear_probe(train_x, train_y, test_x, test_y, classes, ProbeConfig{}, rng);
  EXPECT_GE(r.test_accuracy, 0.99);
  EXPECT_GE(r.train_accuracy, 0.99);
  EXPECT_EQ(r.train_count, 500u);
  EXPECT_EQ(r.test_count, 500u);
  EXPECT_EQ(r.classes, classes);
}

TEST(LinearProbe, Errors) {
  Rng rng(1);
  const std::vector<Vector> x{{1, 0}, {0, 1}};
  EXPECT_THROW(linear_probe(x, {0}, x, {0, 1}, 2, ProbeConfig{}, rng), std::invalid_argument);
  EXPECT_THROW(linear_probe(x, {0, 2}, x, {0, 1}, 2, ProbeConfig{}, rng), std::invalid_argument);
  EXPECT_THROW(linear_probe(x, {0, 1}, x, {0, 1}, 0, ProbeConfig{}, rng), std::invalid_argument);
  EXPECT_THROW(linear_probe({}, {}, x, {0, 1}, 2, ProbeConfig{}, rng), std::invalid_argument);
}

TEST(ProbeEncoder, RandomEncoderIsNearChance) {
  const TrainConfig config;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng init(seed);
    const EncoderParams encoder = make_encoder(config, init);
    Rng rng(seed);
    const ProbeResult r = probe_encoder(encoder, config, ProbeConfig{}, rng);
    EXPECT_GE(r.test_accuracy, 0.05) << "seed " << seed;
    EXPECT_LE(r.test_accuracy, 0.25) << "seed " << seed;
  }
}

TEST(ProbeEncoder, DeterministicUnderSeed) {
  TrainConfig config;
  config.instances = 64;
  Rng init(3);
  const EncoderParams encoder = make_encoder(config, init);
  ProbeConfig pc;
  pc.epochs = 10;
  Rng a(4), b(4);
  const ProbeResult x = probe_encoder(encoder, config, pc, a);
  const ProbeResult y = probe_encoder(encoder, config, pc, b);
  EXPECT_EQ(x.test_accuracy, y.test_accuracy);
  EXPECT_EQ(x.train_accuracy, y.train_accuracy);
  EXPECT_EQ(x.train_count, 64u * pc.views_per_instance);
  EXPECT_EQ(x.test_count, pc.test_instances);
}

TEST(ProbeEncoder, RejectsMismatchedEncoder) {
  TrainConfig config;
  Rng rng(1);
  const EncoderParams encoder = init_encoder({config.ambient_dim + 1, 4, 3}, Activation::kTanh, 1, true, rng);
  EXPECT_THROW(probe_encoder(encoder, config, ProbeConfig{}, rng), std::invalid_argument);
}
