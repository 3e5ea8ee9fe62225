#include "flexact/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flexact {

DivergenceError::DivergenceError(int at_epoch)
    : std::runtime_error("training diverged at epoch " + std::to_string(at_epoch)),
      epoch(at_epoch) {}

Network make_network(std::size_t d_in, ModelMode mode, Activation fixed_kind,
                     Rng& init_rng) {
  Network net;
  net.mode = mode;
  net.fixed_kind = fixed_kind;
  net.layer.W = Matrix(1, d_in);
  for (double& w : net.layer.W.data) w = init_rng.uniform_open() - 0.5;
  net.layer.b = Vector(1);
  net.layer.b[0] = init_rng.uniform_open() - 0.5;
  net.layer.logits = {};
  return net;
}

std::pair<double, Vector> mse_loss(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size() || pred.size() == 0) {
    throw std::invalid_argument("mse_loss: length mismatch");
  }
  const double n = static_cast<double>(pred.size());
  double loss = 0.0;
  Vector grad(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = pred[i] - target[i];
    loss += err * err;
    grad[i] = 2.0 * err / n;
  }
  return {loss / n, std::move(grad)};
}

double anneal_tau(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw std::invalid_argument("anneal_tau: epoch out of range");
  }
  if (cfg.epochs == 1) return cfg.tau_end;
  const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  return cfg.tau_start * std::pow(cfg.tau_end / cfg.tau_start, t);
}

double kl_fade(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw std::invalid_argument("kl_fade: epoch out of range");
  }
  if (cfg.epochs == 1) return 0.0;
  const double frac =
      static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  if (frac <= cfg.kl_fade_start) return 1.0;
  if (frac >= cfg.kl_fade_end) return 0.0;
  return (cfg.kl_fade_end - frac) / (cfg.kl_fade_end - cfg.kl_fade_start);
}

TrainTrace train(Network& net, const Dataset& data, const TrainConfig& cfg) {
  const std::size_t n = data.X.rows;
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (net.layer.W.rows != 1) {
    throw std::invalid_argument("train: expects a scalar-output layer");
  }
  const std::size_t d_in = net.layer.W.cols;
  if (data.X.cols != d_in || data.y.size() != n) {
    throw std::invalid_argument("train: dataset does not match network");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.learning_rate <= 0.0 ||
      cfg.tau_end <= 0.0 || cfg.tau_end > cfg.tau_start || cfg.alpha < 0.0 ||
      cfg.lambda <= 0.0 || cfg.weight_lr_scale <= 0.0 ||
      cfg.kl_fade_start < 0.0 || cfg.kl_fade_end < cfg.kl_fade_start) {
    throw std::invalid_argument("train: invalid config");
  }

  net.layer.straight_through = cfg.straight_through;
  const bool routed = (net.mode == ModelMode::kRouted);
  const double slope = net.layer.leaky_slope;
  const std::size_t fixed_idx = static_cast<std::size_t>(net.fixed_kind);
  const double w_lr = cfg.learning_rate * cfg.weight_lr_scale;

  Rng rng(cfg.seed ^ kNoiseStreamSalt);

  TrainTrace trace;
  trace.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double tau = anneal_tau(epoch, cfg);
    const double fade = kl_fade(epoch, cfg);
    net.layer.temperature = tau;

    double task_sum = 0.0;
    double kl_sum = 0.0;
    Probs p_epoch{};
    std::size_t n_batches = 0;

    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t m = end - start;

      std::vector<double> dW(d_in, 0.0);
      double db = 0.0;
      LogitArray dlogits{};
      double batch_loss = 0.0;
      Probs p_mean{};
      std::vector<double> h_batch(m);

      for (std::size_t i = start; i < end; ++i) {
        double h = net.layer.b[0];
        for (std::size_t c = 0; c < d_in; ++c) {
          h += net.layer.W(0, c) * data.X(i, c);
        }
        h_batch[i - start] = h;

        double pred;
        double dydh;
        double acts[kNumActivations];
        Probs p_soft{};
        if (routed) {
          // Fresh Gumbel noise per sample, annealed with the temperature so
          // exploration fades as the router is asked to commit.
          LogitArray noise;
          for (double& g : noise) g = gumbel_noise(rng) * tau;
          p_soft = gumbel_softmax(net.layer.logits, noise, tau);
          Probs p_fwd = p_soft;
          if (cfg.straight_through) {
            p_fwd = Probs{};
            p_fwd[argmax_index(p_soft)] = 1.0;
          }
          pred = 0.0;
          dydh = 0.0;
          for (std::size_t j = 0; j < kNumActivations; ++j) {
            acts[j] = activation_value(kCatalog[j], h, slope);
            pred += p_fwd[j] * acts[j];
            dydh += p_fwd[j] * activation_deriv(kCatalog[j], h, slope);
          }
          for (std::size_t l = 0; l < kNumActivations; ++l) {
            p_mean[l] += p_soft[l] / static_cast<double>(m);
          }
        } else {
          pred = activation_value(net.fixed_kind, h, slope);
          dydh = activation_deriv(net.fixed_kind, h, slope);
        }

        const double err = pred - data.y[i];
        batch_loss += err * err;
        const double g = 2.0 * err / static_cast<double>(m);
        const double gh = g * dydh;
        for (std::size_t c = 0; c < d_in; ++c) dW[c] += gh * data.X(i, c);
        db += gh;

        if (routed) {
          double s = 0.0;
          for (std::size_t j = 0; j < kNumActivations; ++j) {
            s += p_soft[j] * acts[j];
          }
          for (std::size_t l = 0; l < kNumActivations; ++l) {
            dlogits[l] += g * p_soft[l] * (acts[l] - s) / tau;
          }
        }
      }
      batch_loss /= static_cast<double>(m);

      double kl = 0.0;
      LogitArray dkl{};
      if (routed) {
        Matrix hb(m, 1);
        for (std::size_t i = 0; i < m; ++i) hb(i, 0) = h_batch[i];
        const GradientNormStats stats = gradient_norms(hb, slope);
        const Probs ptilde = pseudo_probs(stats, cfg.lambda);
        // The KL pressure acts on the noise-free unit-temperature router
        // distribution: it steers the logits themselves rather than chasing
        // individual Gumbel samples.
        const Probs p_model = tempered_softmax(net.layer.logits, 1.0);
        kl = kl_divergence(ptilde, p_model);
        dkl = kl_grad_wrt_logits(ptilde, p_model, 1.0);
        for (double& d : dkl) d *= fade;
      }

      const double batch_total = batch_loss + cfg.alpha * kl;
      if (!std::isfinite(batch_total) || std::abs(batch_total) > 1e6) {
        throw DivergenceError(epoch);
      }

      for (std::size_t c = 0; c < d_in; ++c) {
        net.layer.W(0, c) -= w_lr * dW[c];
      }
      net.layer.b[0] -= w_lr * db;
      if (routed) {
        for (std::size_t l = 0; l < kNumActivations; ++l) {
          net.layer.logits[l] -=
              cfg.learning_rate * (dlogits[l] + cfg.alpha * dkl[l]);
        }
      }

      task_sum += batch_loss;
      kl_sum += kl;
      if (routed) {
        for (std::size_t l = 0; l < kNumActivations; ++l) p_epoch[l] += p_mean[l];
      } else {
        p_epoch[fixed_idx] += 1.0;
      }
      ++n_batches;
    }

    EpochRecord rec;
    rec.task_loss = task_sum / static_cast<double>(n_batches);
    rec.kl_loss = kl_sum / static_cast<double>(n_batches);
    rec.total_loss = rec.task_loss + cfg.alpha * rec.kl_loss;
    rec.tau = tau;
    for (std::size_t l = 0; l < kNumActivations; ++l) {
      rec.p_soft[l] = p_epoch[l] / static_cast<double>(n_batches);
    }
    trace.push_back(rec);
  }
  return trace;
}

double evaluate(const Network& net, const Dataset& data) {
  const std::size_t n = data.X.rows;
  if (n == 0) throw std::invalid_argument("evaluate: empty dataset");
  const Activation kind = net.mode == ModelMode::kRouted
                              ? hard_select(net.layer)
                              : net.fixed_kind;
  const std::size_t d_in = net.layer.W.cols;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double h = net.layer.b[0];
    for (std::size_t c = 0; c < d_in; ++c) h += net.layer.W(0, c) * data.X(i, c);
    const double err =
        activation_value(kind, h, net.layer.leaky_slope) - data.y[i];
    sum += err * err;
  }
  return sum / static_cast<double>(n);
}

}  // namespace flexact
