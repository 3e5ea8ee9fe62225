#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flexact/model.hpp"

using namespace flexact;

namespace {

Dataset make_data(Activation truth, std::uint64_t seed,
                  std::size_t n = 2560) {
  DatasetSpec spec;
  spec.truth = truth;
  spec.seed = seed;
  spec.n_samples = n;
  return generate(spec);
}

}  // namespace

TEST_CASE("mse_loss hand example") {
  auto [loss, grad] = mse_loss(Vector{1.0, 3.0}, Vector{0.0, 0.0});
  CHECK(loss == doctest::Approx(5.0));
  CHECK(grad[0] == doctest::Approx(1.0));
  CHECK(grad[1] == doctest::Approx(3.0));
}

TEST_CASE("mse_loss of a perfect prediction is zero") {
  auto [loss, grad] = mse_loss(Vector{0.5, -2.0}, Vector{0.5, -2.0});
  CHECK(loss == 0.0);
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == 0.0);
}

TEST_CASE("mse_loss rejects mismatched lengths") {
  CHECK_THROWS(mse_loss(Vector{1.0}, Vector{1.0, 2.0}));
  CHECK_THROWS(mse_loss(Vector{}, Vector{}));
}

TEST_CASE("anneal_tau hits both endpoints and the geometric midpoint") {
  TrainConfig cfg;
  cfg.epochs = 101;
  cfg.tau_start = 1.0;
  cfg.tau_end = 0.1;
  CHECK(anneal_tau(0, cfg) == doctest::Approx(1.0));
  CHECK(anneal_tau(100, cfg) == doctest::Approx(0.1));
  CHECK(anneal_tau(50, cfg) == doctest::Approx(0.31622776601).epsilon(1e-9));
}

TEST_CASE("anneal_tau is monotone non-increasing") {
  TrainConfig cfg;
  double prev = cfg.tau_start + 1.0;
  for (int e = 0; e < cfg.epochs; ++e) {
    const double tau = anneal_tau(e, cfg);
    CHECK(tau <= prev + 1e-15);
    CHECK(tau > 0.0);
    prev = tau;
  }
}

TEST_CASE("anneal_tau single-epoch schedule ends cold") {
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK(anneal_tau(0, cfg) == cfg.tau_end);
}

TEST_CASE("anneal_tau rejects epochs outside the schedule") {
  TrainConfig cfg;
  CHECK_THROWS(anneal_tau(-1, cfg));
  CHECK_THROWS(anneal_tau(cfg.epochs, cfg));
}

TEST_CASE("kl_fade is a plateau then a linear ramp to zero") {
  TrainConfig cfg;
  cfg.epochs = 301;
  cfg.kl_fade_start = 1.0 / 6.0;
  cfg.kl_fade_end = 1.0 / 3.0;
  CHECK(kl_fade(0, cfg) == 1.0);
  CHECK(kl_fade(50, cfg) == 1.0);               // frac == 1/6
  CHECK(kl_fade(75, cfg) == doctest::Approx(0.5));  // midpoint of the ramp
  CHECK(kl_fade(100, cfg) == 0.0);              // frac == 1/3
  CHECK(kl_fade(300, cfg) == 0.0);
  double prev = 2.0;
  for (int e = 0; e < cfg.epochs; ++e) {
    const double f = kl_fade(e, cfg);
    CHECK(f <= prev + 1e-15);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    prev = f;
  }
  CHECK_THROWS(kl_fade(-1, cfg));
  CHECK_THROWS(kl_fade(cfg.epochs, cfg));
}

TEST_CASE("make_network draws bounded weights and zero logits") {
  Rng rng(12);
  Network net = make_network(4, ModelMode::kRouted, Activation::kRelu, rng);
  CHECK(net.layer.W.rows == 1);
  CHECK(net.layer.W.cols == 4);
  for (double w : net.layer.W.data) {
    CHECK(w > -0.5);
    CHECK(w < 0.5);
  }
  CHECK(net.layer.b.size() == 1);
  for (double l : net.layer.logits) CHECK(l == 0.0);

  Rng rng2(12);
  Network net2 = make_network(4, ModelMode::kRouted, Activation::kRelu, rng2);
  CHECK(net.layer.W == net2.layer.W);
}

TEST_CASE("train rejects invalid configurations") {
  Rng rng(0);
  Network net = make_network(4, ModelMode::kFixed, Activation::kIdentity, rng);
  const Dataset data = make_data(Activation::kIdentity, 0, 64);
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS(train(net, data, cfg));
  cfg = TrainConfig{};
  cfg.learning_rate = -1.0;
  CHECK_THROWS(train(net, data, cfg));
  cfg = TrainConfig{};
  cfg.tau_end = 2.0 * cfg.tau_start;
  CHECK_THROWS(train(net, data, cfg));
  cfg = TrainConfig{};
  cfg.alpha = -0.1;
  CHECK_THROWS(train(net, data, cfg));
}

TEST_CASE("a fixed identity model solves the identity task to machine noise") {
  Rng rng(0);
  Network net = make_network(4, ModelMode::kFixed, Activation::kIdentity, rng);
  const Dataset data = make_data(Activation::kIdentity, 0);
  TrainConfig cfg;
  cfg.alpha = 0.0;
  TrainTrace trace = train(net, data, cfg);
  REQUIRE(trace.size() == static_cast<std::size_t>(cfg.epochs));
  CHECK(trace.back().task_loss < 1e-6);
  CHECK(evaluate(net, data) < 1e-6);
}

TEST_CASE("training is bit-deterministic given the seed") {
  const Dataset data = make_data(Activation::kSigmoid, 1, 640);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.seed = 5;

  Rng a(7), b(7);
  Network na = make_network(4, ModelMode::kRouted, Activation::kRelu, a);
  Network nb = make_network(4, ModelMode::kRouted, Activation::kRelu, b);
  TrainTrace ta = train(na, data, cfg);
  TrainTrace tb = train(nb, data, cfg);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t e = 0; e < ta.size(); ++e) {
    CHECK(ta[e].task_loss == tb[e].task_loss);
    CHECK(ta[e].kl_loss == tb[e].kl_loss);
    CHECK(ta[e].total_loss == tb[e].total_loss);
    CHECK(ta[e].p_soft == tb[e].p_soft);
  }
  CHECK(na.layer.W == nb.layer.W);
  CHECK(na.layer.logits == nb.layer.logits);

  cfg.seed = 6;
  Rng c(7);
  Network nc = make_network(4, ModelMode::kRouted, Activation::kRelu, c);
  TrainTrace tc = train(nc, data, cfg);
  CHECK(tc.back().task_loss != ta.back().task_loss);
}

TEST_CASE("trace records keep the accounting identities") {
  const Dataset data = make_data(Activation::kTanh, 2, 640);
  TrainConfig cfg;
  cfg.epochs = 60;
  Rng rng(3);
  Network net = make_network(4, ModelMode::kRouted, Activation::kRelu, rng);
  TrainTrace trace = train(net, data, cfg);
  double prev_tau = cfg.tau_start + 1.0;
  for (const EpochRecord& rec : trace) {
    CHECK(std::abs(rec.total_loss - (rec.task_loss + cfg.alpha * rec.kl_loss)) <=
          1e-12);
    CHECK(rec.tau <= prev_tau + 1e-15);
    prev_tau = rec.tau;
    double sum = 0.0;
    for (double p : rec.p_soft) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(rec.kl_loss >= -1e-12);
  }
}

TEST_CASE("fixed-mode traces report a one-hot selection with zero KL") {
  const Dataset data = make_data(Activation::kRelu, 4, 320);
  TrainConfig cfg;
  cfg.epochs = 10;
  Rng rng(1);
  Network net = make_network(4, ModelMode::kFixed, Activation::kTanh, rng);
  TrainTrace trace = train(net, data, cfg);
  for (const EpochRecord& rec : trace) {
    CHECK(rec.kl_loss == 0.0);
    CHECK(rec.p_soft[static_cast<std::size_t>(Activation::kTanh)] == 1.0);
    for (std::size_t l = 0; l < kNumActivations; ++l) {
      if (l != static_cast<std::size_t>(Activation::kTanh)) {
        CHECK(rec.p_soft[l] == 0.0);
      }
    }
  }
}

TEST_CASE("an absurd learning rate raises DivergenceError") {
  const Dataset data = make_data(Activation::kIdentity, 0, 640);
  TrainConfig cfg;
  cfg.learning_rate = 1e6;
  Rng rng(0);
  Network net = make_network(4, ModelMode::kFixed, Activation::kIdentity, rng);
  bool threw = false;
  try {
    train(net, data, cfg);
  } catch (const DivergenceError& e) {
    threw = true;
    CHECK(e.epoch >= 0);
    CHECK(e.epoch < cfg.epochs);
  }
  CHECK(threw);
}

TEST_CASE("one training step matches a hand-assembled update") {
  // One epoch, one batch: replay the exact noise stream and rebuild the
  // gradient from the published formulas.
  const std::size_t m = 8;
  const std::size_t d_in = 4;
  DatasetSpec dspec;
  dspec.truth = Activation::kTanh;
  dspec.seed = 9;
  dspec.n_samples = m;
  const Dataset data = generate(dspec);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = static_cast<int>(m);
  cfg.learning_rate = 0.01;
  cfg.alpha = 0.3;
  cfg.weight_lr_scale = 2.0;
  cfg.tau_start = 1.0;
  cfg.tau_end = 0.5;
  cfg.seed = 17;

  Rng init(3);
  Network net = make_network(d_in, ModelMode::kRouted, Activation::kRelu, init);
  const Matrix W0 = net.layer.W;
  const Vector b0 = net.layer.b;
  const LogitArray logits0 = net.layer.logits;

  TrainTrace trace = train(net, data, cfg);
  REQUIRE(trace.size() == 1);

  // Expected update. epochs == 1 means tau == tau_end and the KL ramp has
  // already closed (fade == 0).
  const double tau = cfg.tau_end;
  Rng noise_rng(cfg.seed ^ kNoiseStreamSalt);
  std::vector<double> dW(d_in, 0.0);
  double db = 0.0;
  LogitArray dlogits{};
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double h = b0[0];
    for (std::size_t c = 0; c < d_in; ++c) h += W0(0, c) * data.X(i, c);
    LogitArray noise;
    for (double& g : noise) g = gumbel_noise(noise_rng) * tau;
    const Probs p = gumbel_softmax(logits0, noise, tau);
    double pred = 0.0, dydh = 0.0, s = 0.0;
    double acts[kNumActivations];
    for (std::size_t j = 0; j < kNumActivations; ++j) {
      acts[j] = activation_value(kCatalog[j], h);
      pred += p[j] * acts[j];
      dydh += p[j] * activation_deriv(kCatalog[j], h);
      s += p[j] * acts[j];
    }
    const double err = pred - data.y[i];
    loss += err * err;
    const double g = 2.0 * err / static_cast<double>(m);
    for (std::size_t c = 0; c < d_in; ++c) dW[c] += g * dydh * data.X(i, c);
    db += g * dydh;
    for (std::size_t l = 0; l < kNumActivations; ++l) {
      dlogits[l] += g * p[l] * (acts[l] - s) / tau;
    }
  }
  loss /= static_cast<double>(m);

  CHECK(trace[0].task_loss == doctest::Approx(loss).epsilon(1e-12));
  const double w_lr = cfg.learning_rate * cfg.weight_lr_scale;
  for (std::size_t c = 0; c < d_in; ++c) {
    CHECK(net.layer.W(0, c) ==
          doctest::Approx(W0(0, c) - w_lr * dW[c]).epsilon(1e-12));
  }
  CHECK(net.layer.b[0] == doctest::Approx(b0[0] - w_lr * db).epsilon(1e-12));
  for (std::size_t l = 0; l < kNumActivations; ++l) {
    CHECK(net.layer.logits[l] ==
          doctest::Approx(logits0[l] - cfg.learning_rate * dlogits[l])
              .epsilon(1e-12));
  }
}

TEST_CASE("the routed model recovers a tanh ground truth") {
  DatasetSpec dspec;
  dspec.truth = Activation::kTanh;
  dspec.seed = 0;
  const Dataset data = generate(dspec);
  auto [train_set, test_set] = split(data, 0.8, 0);

  TrainConfig cfg;  // defaults: alpha 0.3
  cfg.seed = 0;
  Rng init(0);
  Network net = make_network(4, ModelMode::kRouted, Activation::kRelu, init);
  TrainTrace trace = train(net, train_set, cfg);

  CHECK(hard_select(net.layer) == Activation::kTanh);
  CHECK(trace.back().p_soft[static_cast<std::size_t>(Activation::kTanh)] > 0.9);
  CHECK(evaluate(net, test_set) < 1e-3);
}

TEST_CASE("evaluate scores the hard-committed model") {
  Rng rng(0);
  Network net = make_network(1, ModelMode::kRouted, Activation::kRelu, rng);
  net.layer.W(0, 0) = 1.0;
  net.layer.b[0] = 0.0;
  net.layer.logits = LogitArray{0, 0, 0, 0, 10};  // identity wins
  Dataset data;
  data.X = Matrix(2, 1);
  data.X(0, 0) = 1.5;
  data.X(1, 0) = -2.0;
  data.y = Vector{1.5, -2.0};
  CHECK(evaluate(net, data) == 0.0);
  data.y = Vector{2.5, -2.0};  // one unit of error on the first sample
  CHECK(evaluate(net, data) == doctest::Approx(0.5));
  CHECK_THROWS(evaluate(net, Dataset{}));
}
