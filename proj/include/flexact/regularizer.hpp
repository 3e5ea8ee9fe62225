#pragma once

#include "flexact/routing.hpp"

namespace flexact {

/// Per-candidate derivative norms at the routed layer's pre-activations.
struct GradientNormStats {
  Matrix per_sample;  // batch x 5, L2 norm over output dims per sample
  std::array<double, kNumActivations> mean{};  // batch average per candidate
};

/// For each candidate: per-sample L2 norm (over output dimensions) of the
/// element-wise activation derivative at h, then the batch mean.
GradientNormStats gradient_norms(const Matrix& h_batch,
                                 double leaky_slope = kDefaultLeakySlope);

/// softmax(-mean_norms / lambda): smaller average derivative norm, larger
/// pseudo-probability. This is the stop-gradient KL target.
Probs pseudo_probs(const GradientNormStats& stats, double lambda);

/// sum_k target[k] * log(target[k] / model[k]) with 0 log 0 == 0; model
/// entries clamped below at 1e-12 so hard one-hot samples stay finite.
double kl_divergence(const Probs& target, const Probs& model);

struct LossBreakdown {
  double task = 0.0;
  double kl = 0.0;
  double alpha = 0.0;
  double total = 0.0;  // task + alpha * kl
};

LossBreakdown total_loss(double task, double kl, double alpha);

/// Gradient of kl_divergence(target, softmax((logits + g)/tau)) with respect
/// to the logits, target held constant. Closed form: (p_soft - target) / tau.
LogitArray kl_grad_wrt_logits(const Probs& target, const Probs& p_soft, double tau);

}  // namespace flexact
