#include "gradcheck.hpp"

#include "tpr/cnn.hpp"
#include "tpr/digest.hpp"
#include "tpr/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace tpr;

namespace {

NetworkSpec small_net() {
  NetworkSpec net;
  net.height = net.width = 6;
  net.conv = {{2, 3, 1}};
  net.dense = {8};
  net.classes = 3;
  return net;
}

// Class 0 lights the left half of a 4x4 image, class 1 the right half, with
// one pixel varying per sample.
BinaryImageDataset toy_set() {
  BinaryImageDataset ds(4, 4, 2);
  for (int i = 0; i < 8; ++i) {
    for (int c = 0; c < 2; ++c) {
      std::vector<std::uint8_t> bits(16, 0);
      for (int r = 0; r < 4; ++r) {
        for (int x = 0; x < 2; ++x) bits[static_cast<std::size_t>(r * 4 + x + 2 * c)] = 1;
      }
      bits[static_cast<std::size_t>((i * 5 + c) % 16)] ^= 1;
      ds.add(bits, c);
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("network shapes") {
  const auto def = NetworkSpec::mnist_default();
  // 8*9+8, 16*8*9+16, 64*(16*12*12)+64, 10*64+10
  CHECK(def.parameter_count() == 80 + 1168 + 147520 + 650);
  CHECK(def.describe() == "input=28x28;conv=8/3/1/relu;conv=16/3/2/relu;dense=64/relu;out=10/softmax");
  NetworkSpec bad = small_net();
  bad.conv.push_back({1, 5, 1});
  CHECK_THROWS_AS(bad.validate(), Error);
  const auto net = small_net();
  CHECK_THROWS_AS(forward(net, Parameters(3, 0.0), std::vector<double>(36, 0.0)), Error);
  CHECK_THROWS_AS(forward(net, init_parameters(net, 1), std::vector<double>(35, 0.0)), Error);
}

TEST_CASE("zero parameters give a uniform output") {
  const auto net = small_net();
  const Parameters zero(net.parameter_count(), 0.0);
  const auto p = forward(net, zero, std::vector<double>(36, 1.0));
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  std::vector<Example> batch;
  for (int c = 0; c < 3; ++c) batch.push_back({std::vector<double>(36, 0.5), c});
  CHECK(std::abs(mean_loss(net, zero, batch) - std::log(3.0)) <= 1e-9);
}

TEST_CASE("single-class network") {
  NetworkSpec net;
  net.height = net.width = 3;
  net.conv = {{1, 1, 1}};
  net.classes = 1;
  Parameters p(net.parameter_count(), 0.0);
  p[0] = 1.0;
  const auto out = forward(net, p, std::vector<double>{0, 1, 0, 1, 1, 0, 0, 0, 1});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 1.0);
}

TEST_CASE("relu layers clip negative activations") {
  // one 1x1 conv filter with weight -1 or 2 feeding a fixed readout
  NetworkSpec net;
  net.height = 1;
  net.width = 1;
  net.conv = {{1, 1, 1}};
  net.classes = 2;
  Parameters p(net.parameter_count(), 0.0);
  // layout: conv w, conv b, dense w[2], dense b[2]
  p[2] = 1.0;
  p[0] = -1.0;
  auto out = forward(net, p, std::vector<double>{1.0});
  CHECK(out[0] == doctest::Approx(0.5));
  p[0] = 2.0;
  out = forward(net, p, std::vector<double>{1.0});
  CHECK(out[0] == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1.0)));
}

TEST_CASE("softmax output is normalized") {
  for (int a = 0; a < 5; ++a) {
    const auto net = gradcheck::architecture(a, 17);
    const auto params = init_parameters(net, static_cast<std::uint64_t>(a));
    CounterRng rng(3, static_cast<std::uint64_t>(a), 0);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> img(static_cast<std::size_t>(net.height * net.width));
      for (auto& v : img) v = 10.0 * (rng.uniform() - 0.5);
      const auto p = forward(net, params, img);
      CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-9);
      for (double v : p) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("duplicated batch doubles loss and gradient") {
  const auto net = small_net();
  const auto params = init_parameters(net, 4);
  std::vector<Example> one{{std::vector<double>(36, 0.25), 1}};
  for (std::size_t i = 0; i < 36; i += 5) one[0].image[i] = 1.0;
  const std::vector<Example> two{one[0], one[0]};
  const auto a = loss_and_grad(net, params, one);
  const auto b = loss_and_grad(net, params, two);
  CHECK(b.loss == 2.0 * a.loss);
  for (std::size_t i = 0; i < a.grad.size(); ++i) CHECK(b.grad[i] == 2.0 * a.grad[i]);
  CHECK_THROWS_AS(loss_and_grad(net, params, std::vector<Example>{}), Error);
}

TEST_CASE("backprop matches finite differences") {
  for (int a = 0; a < 5; ++a) {
    const auto net = gradcheck::architecture(a, 2024);
    const auto r = gradcheck::run(net, 100 + static_cast<std::uint64_t>(a), 100);
    INFO(net.describe() << " skipped=" << r.skipped);
    CHECK(r.checked == 100);
    CHECK(r.max_rel <= 1e-4);
  }
}

TEST_CASE("training separates a toy set") {
  const auto data = toy_set();
  NetworkSpec net;
  net.height = net.width = 4;
  net.conv = {{2, 2, 1}};
  net.dense = {4};
  net.classes = 2;
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.1;
  cfg.holdout_fraction = 0.0;
  cfg.seed = 3;
  const auto result = train(net, data, NoiseModel::fixed(0.0), cfg);
  REQUIRE(result.trace.size() == 50);
  bool separated = false;
  for (const auto& rec : result.trace) separated = separated || rec.train_accuracy == 1.0;
  CHECK(separated);
  const auto e = evaluate(net, result.params, data, NoiseModel::fixed(0.0), 1, 1);
  CHECK(e.errors == 0);
}

TEST_CASE("zero learning rate keeps the initial parameters") {
  const auto data = toy_set();
  NetworkSpec net;
  net.height = net.width = 4;
  net.dense = {3};
  net.classes = 2;
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  const auto r = train(net, data, NoiseModel::fixed(0.1), cfg);
  CHECK(r.params == init_parameters(net, cfg.seed));
}

TEST_CASE("training is deterministic") {
  const auto data = toy_set();
  NetworkSpec net;
  net.height = net.width = 4;
  net.conv = {{2, 2, 1}};
  net.classes = 2;
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.holdout_fraction = 0.25;
  const auto a = train(net, data, NoiseModel::fixed(0.1), cfg);
  const auto b = train(net, data, NoiseModel::fixed(0.1), cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].mean_loss == b.trace[i].mean_loss);
    CHECK(a.trace[i].holdout_accuracy == b.trace[i].holdout_accuracy);
  }
  CHECK(a.params == b.params);
  CHECK(a.best_epoch == b.best_epoch);
}

TEST_CASE("untrained uniform network guesses") {
  BinaryImageDataset eval(3, 3, 10, BinaryImageDataset::Split::Evaluation);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> bits(9, 0);
    bits[static_cast<std::size_t>(i % 9)] = 1;
    eval.add(bits, i % 10);
  }
  NetworkSpec net;
  net.height = net.width = 3;
  net.classes = 10;
  // ties in argmax pick class 0, which is right for a tenth of a balanced set
  const auto e = evaluate(net, Parameters(net.parameter_count(), 0.0), eval, NoiseModel::fixed(0.3), 5, 2);
  CHECK(std::abs(e.mean - 0.9) <= 3.0 * std::sqrt(0.09 / e.samples));
}

TEST_CASE("checkpoint round trip") {
  const auto net = small_net();
  const auto params = init_parameters(net, 99);
  const auto path = std::filesystem::temp_directory_path() / "tpr_ckpt_test.bin";
  save_checkpoint(path, net, params);
  CHECK(load_checkpoint(path, net) == params);

  const std::string raw = read_file(path);
  CHECK(raw.substr(0, 8) == std::string("TPRCKPT\0", 8));
  CHECK(raw.size() == 8 + 4 + 64 + 8 + 8 * params.size());
  CHECK(raw.substr(12, 64) == sha256_hex(net.describe()));

  auto other = net;
  other.classes = 4;
  CHECK_THROWS_AS(load_checkpoint(path, other), Error);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(raw.data(), static_cast<std::streamsize>(raw.size() - 3));
  }
  CHECK_THROWS_AS(load_checkpoint(path, net), Error);
  std::filesystem::remove(path);
}
