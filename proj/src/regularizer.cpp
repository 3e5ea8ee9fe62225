#include "flexact/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flexact {

GradientNormStats gradient_norms(const Matrix& h_batch, double leaky_slope) {
  if (h_batch.rows == 0) {
    throw std::invalid_argument("gradient_norms: empty batch");
  }
  GradientNormStats stats;
  stats.per_sample = Matrix(h_batch.rows, kNumActivations);
  for (std::size_t i = 0; i < h_batch.rows; ++i) {
    for (std::size_t j = 0; j < kNumActivations; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < h_batch.cols; ++k) {
        const double d = activation_deriv(kCatalog[j], h_batch(i, k), leaky_slope);
        sq += d * d;
      }
      const double norm = std::sqrt(sq);
      stats.per_sample(i, j) = norm;
      stats.mean[j] += norm;
    }
  }
  for (double& m : stats.mean) m /= static_cast<double>(h_batch.rows);
  return stats;
}

Probs pseudo_probs(const GradientNormStats& stats, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("pseudo_probs: lambda must be > 0");
  LogitArray neg;
  for (std::size_t j = 0; j < kNumActivations; ++j) neg[j] = -stats.mean[j];
  return tempered_softmax(neg, lambda);
}

double kl_divergence(const Probs& target, const Probs& model) {
  constexpr double kFloor = 1e-12;
  double kl = 0.0;
  for (std::size_t k = 0; k < kNumActivations; ++k) {
    if (target[k] <= 0.0) continue;  // 0 log 0 == 0
    kl += target[k] * std::log(target[k] / std::max(model[k], kFloor));
  }
  return kl;
}

LossBreakdown total_loss(double task, double kl, double alpha) {
  if (task < 0.0 || kl < 0.0 || alpha < 0.0) {
    throw std::invalid_argument("total_loss: task, kl, alpha must be >= 0");
  }
  return LossBreakdown{task, kl, alpha, task + alpha * kl};
}

LogitArray kl_grad_wrt_logits(const Probs& target, const Probs& p_soft, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("kl_grad_wrt_logits: tau must be > 0");
  LogitArray grad{};
  for (std::size_t l = 0; l < kNumActivations; ++l) {
    grad[l] = (p_soft[l] - target[l]) / tau;
  }
  return grad;
}

}  // namespace flexact
