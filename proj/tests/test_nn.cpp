#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "mmsleep/errors.hpp"
#include "mmsleep/nn.hpp"
#include "mmsleep/random.hpp"
#include "oracles.hpp"

using namespace mmsleep;

namespace {

std::vector<TrainSample> random_batch(std::size_t n, std::size_t in, std::size_t out, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), t(0.0, 1.0);
  std::vector<TrainSample> b(n);
  for (auto& s : b) {
    s.input.resize(in);
    for (double& x : s.input) x = u(rng);
    s.output = std::uniform_int_distribution<std::size_t>(0, out - 1)(rng);
    s.target = t(rng);
  }
  return b;
}

// Largest relative deviation between backprop and central differences; the
// denominator has a 1e-3 floor so that near-zero gradients are compared on
// an absolute scale.
double max_gradient_error(MlpModel m, const std::vector<TrainSample>& batch, double h) {
  const Gradients g = compute_gradients(m, batch);
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = oracle::reference_loss(m, batch);
    param = saved - h;
    const double down = oracle::reference_loss(m, batch);
    param = saved;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-3}));
  };
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    auto& L = m.layers()[l];
    for (std::size_t k = 0; k < L.weights.size(); ++k) check(L.weights[k], g.weights[l][k]);
    for (std::size_t k = 0; k < L.bias.size(); ++k) check(L.bias[k], g.bias[l][k]);
  }
  return worst;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("zero parameters give zero output") {
  MlpModel m = init_weights(std::vector<std::size_t>{4, 8, 3}, 1);
  for (auto& L : m.layers()) {
    std::fill(L.weights.begin(), L.weights.end(), 0.0);
    std::fill(L.bias.begin(), L.bias.end(), 0.0);
  }
  CHECK(m.forward(std::vector<double>{1, -2, 3, 4}) == std::vector<double>(3, 0.0));
}

TEST_CASE("single-neuron composition") {
  MlpModel m = init_weights(std::vector<std::size_t>{1, 1, 1}, 1);
  const double w = 1.7;
  m.layers()[0].weights = {w};
  m.layers()[1].weights = {w};
  for (double x : {-2.0, -0.1, 0.0, 0.3, 5.0}) {
    CHECK(m.forward(std::vector<double>{x})[0] == w * std::max(0.0, w * x));
  }
}

TEST_CASE("output width equals the action count") {
  const MlpModel m = init_weights(std::vector<std::size_t>{30, 128, 64, 1365}, 2);
  CHECK(m.output_size() == 1365);
  CHECK(m.forward(std::vector<double>(30, 0.5)).size() == 1365);
  CHECK(m.parameter_count() == 30 * 128 + 128 + 128 * 64 + 64 + 64 * 1365 + 1365);
  CHECK_THROWS_AS(m.forward(std::vector<double>(29, 0.5)), DimensionError);
}

TEST_CASE("predict agrees with forward bit for bit") {
  const MlpModel m = init_weights(std::vector<std::size_t>{6, 10, 7, 9}, 4);
  const std::vector<double> x{0.1, -0.4, 0.9, 0.0, 0.3, -0.7};
  const auto full = m.forward(x);
  for (std::size_t k = 0; k < full.size(); ++k) CHECK(m.predict(x, k) == full[k]);
}

TEST_CASE("initialization is seeded and He-scaled") {
  const std::vector<std::size_t> sizes{50, 400, 3};
  const MlpModel a = init_weights(sizes, 9), b = init_weights(sizes, 9);
  CHECK(a.layers()[0].weights == b.layers()[0].weights);
  CHECK(init_weights(sizes, 10).layers()[0].weights != a.layers()[0].weights);
  const auto& w = a.layers()[0].weights;
  double mean = 0, var = 0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  for (double v : w) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size());
  CHECK(var == doctest::Approx(2.0 / 50).epsilon(0.05));
  for (double v : a.layers()[0].bias) CHECK(v == 0.0);
  CHECK_THROWS(init_weights(std::vector<std::size_t>{4, 0, 2}, 1));
}

TEST_CASE("backprop matches central finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t in = 2 + trial % 4, h1 = 3 + trial % 5, h2 = 2 + trial % 3, out = 2 + trial % 6;
    AdamConfig adam;
    adam.l2_lambda = 1e-3;
    MlpModel m =
        init_weights(std::vector<std::size_t>{in, h1, h2, out}, 100 + static_cast<unsigned>(trial), adam);
    // Zero biases can put a unit exactly on the ReLU kink, where central
    // differences average the two one-sided slopes.
    std::uniform_real_distribution<double> ub(-0.3, 0.3);
    for (auto& L : m.layers())
      for (double& v : L.bias) v = ub(rng);
    const auto batch = random_batch(5, in, out, rng);
    CHECK(max_gradient_error(m, batch, 1e-6) < 1e-5);
  }
}

TEST_CASE("loss matches the reference evaluation") {
  Rng rng(2);
  const MlpModel m = init_weights(std::vector<std::size_t>{3, 5, 4}, 6);
  const auto batch = random_batch(8, 3, 4, rng);
  CHECK(loss(m, batch) == doctest::Approx(oracle::reference_loss(m, batch)).epsilon(1e-13));
}

TEST_CASE("one Adam step in closed form") {
  AdamConfig adam;
  adam.l2_lambda = 1e-4;
  MlpModel m = init_weights(std::vector<std::size_t>{1, 1}, 1, adam);
  const double w = 0.8, b = 0.1, x = 1.5, y = 0.4;
  m.layers()[0].weights = {w};
  m.layers()[0].bias = {b};
  const std::vector<TrainSample> batch{{{x}, 0, y}};
  const double err = w * x + b - y;
  const double gw = 2 * err * x + 2 * adam.l2_lambda * w;
  const double gb = 2 * err;
  const double pre = train_step(m, batch);
  CHECK(pre == doctest::Approx(err * err + adam.l2_lambda * w * w).epsilon(1e-14));
  // After one step m_hat = g and v_hat = g^2.
  CHECK(std::abs(m.layers()[0].weights[0] - (w - adam.learning_rate * gw / (std::abs(gw) + adam.epsilon))) < 1e-12);
  CHECK(std::abs(m.layers()[0].bias[0] - (b - adam.learning_rate * gb / (std::abs(gb) + adam.epsilon))) < 1e-12);
  CHECK(m.step() == 1);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  AdamConfig adam;
  adam.l2_lambda = 0.0;
  MlpModel m = init_weights(std::vector<std::size_t>{4, 6, 5, 3}, 8, adam);
  Rng rng(3);
  auto batch = random_batch(6, 4, 3, rng);
  for (auto& s : batch) s.target = m.predict(s.input, s.output);
  const MlpModel before = m;
  CHECK(train_step(m, batch) == 0.0);
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    CHECK(m.layers()[l].weights == before.layers()[l].weights);
    CHECK(m.layers()[l].bias == before.layers()[l].bias);
  }
}

TEST_CASE("weight decay alone shrinks the weights") {
  AdamConfig adam;
  adam.l2_lambda = 1e-2;
  MlpModel m = init_weights(std::vector<std::size_t>{3, 6, 2}, 12, adam);
  Rng rng(9);
  auto batch = random_batch(4, 3, 2, rng);
  double prev = m.weight_norm_sq();
  for (int step = 0; step < 20; ++step) {
    for (auto& s : batch) s.target = m.predict(s.input, s.output);
    train_step(m, batch);
    const double now = m.weight_norm_sq();
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("a fixed pair is fitted within 5000 steps") {
  MlpModel m = init_weights(std::vector<std::size_t>{4, 16, 8, 5}, 5);
  const std::vector<TrainSample> batch{{{0.2, 0.4, 0.6, 0.8}, 3, 0.75}};
  int steps = 0;
  while (steps < 5000 && std::abs(m.predict(batch[0].input, 3) - 0.75) >= 1e-3) {
    train_step(m, batch);
    ++steps;
  }
  CHECK(steps < 5000);
}

TEST_CASE("non-finite loss aborts and restores the model") {
  MlpModel m = init_weights(std::vector<std::size_t>{2, 3, 2}, 5);
  const MlpModel before = m;
  const std::vector<TrainSample> bad{{{1.0, std::nan("")}, 0, 0.5}};
  CHECK_THROWS_AS(train_step(m, bad), NumericError);
  CHECK(m.layers()[0].weights == before.layers()[0].weights);
  CHECK(m.step() == before.step());
  CHECK(m.all_finite());
}

TEST_CASE("checkpoint round-trip reproduces outputs exactly") {
  MlpModel m = init_weights(std::vector<std::size_t>{5, 7, 4}, 21);
  Rng rng(1);
  const auto batch = random_batch(8, 5, 4, rng);
  for (int i = 0; i < 3; ++i) train_step(m, batch);
  const MlpModel back = checkpoint_from_string(checkpoint_to_string(m));
  CHECK(back.step() == m.step());
  for (const auto& s : batch) CHECK(back.forward(s.input) == m.forward(s.input));
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    CHECK(back.layers()[l].m_weights == m.layers()[l].m_weights);
    CHECK(back.layers()[l].v_bias == m.layers()[l].v_bias);
  }
  const auto path = std::filesystem::temp_directory_path() / "mmsleep_ckpt_test.json";
  save_checkpoint(m, path);
  CHECK(load_checkpoint(path).forward(batch[0].input) == m.forward(batch[0].input));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(checkpoint_from_string("{\"format\": \"other\"}"), FormatError);
}

}  // TEST_SUITE
